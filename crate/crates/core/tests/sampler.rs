mod common;

use common::{batch_mcse, data_free, enumerate_path_posterior, joint_log_density, mean};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stppm_core::graph::{indicators_for, SpatialGraph};
use stppm_core::likelihood::{Dataset, DatasetParts};
use stppm_core::prior::prior_predictive_partitions_given;
use stppm_core::mcmc::{
    chain_rng, log_target_beta, log_target_c, log_target_delta, log_target_kappa, log_target_u,
    log_target_upsilon, run_chain, update_rho, update_w, update_zeta, Block, ChainState, Family, Kernel,
    SamplerConfig,
};

fn small_data() -> (SpatialGraph, Dataset) {
    let graph = SpatialGraph::grid(2, 2).unwrap();
    let n = 4;
    let weeks = 6;
    let y: Vec<u64> = (0..n * weeks).map(|k| (k * 7 % 5) as u64).collect();
    let offset: Vec<f64> = (0..n * weeks).map(|k| 0.5 + (k % 3) as f64).collect();
    let x: Vec<f64> = (0..n * weeks * 2).map(|k| ((k as f64) * 0.37).sin()).collect();
    let v: Vec<f64> = (0..n * 3).flat_map(|k| [1.0, (k as f64 * 0.5).cos()]).collect();
    let data = Dataset::new(DatasetParts {
        n_areas: n,
        n_seasons: 3,
        season_of_week: vec![0, 0, 1, 1, 2, 2],
        y,
        offset,
        p_mean: 2,
        x,
        p_disp: 2,
        v,
    })
    .unwrap();
    (graph, data)
}

/// A state away from initialization: a few sweeps, then hand-set latents.
fn scrambled_state(graph: &SpatialGraph, data: &Dataset, cfg: &SamplerConfig) -> ChainState {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut st = ChainState::initial(graph, data, cfg, &mut rng).unwrap();
    let mut kernel = Kernel::new(graph, data, cfg, &st);
    for _ in 0..20 {
        kernel.sweep(&mut st, &mut rng).unwrap();
    }
    st.latent.c = vec![3, 0, 5, 2];
    st.latent.u = vec![1, 0, 2, 2];
    st.latent.rho = vec![0.2, 0.05, 0.6, 0.3];
    st.latent.w = 0.35;
    st.latent.zeta = 1.7;
    st.beta = vec![0.3, -0.2];
    st.delta = vec![-0.1, 0.4];
    st
}

#[test]
fn hyper_targets_match_joint_density() {
    let (graph, data) = small_data();
    let cfg = SamplerConfig::default();
    let st = scrambled_state(&graph, &data, &cfg);
    let l = &st.latent;
    for (v0, v1) in [(3.0, 12.5), (0.4, 9.0)] {
        let mut a = st.clone();
        let mut b = st.clone();
        a.latent.upsilon = v0;
        b.latent.upsilon = v1;
        let want = joint_log_density(&data, &cfg, &b) - joint_log_density(&data, &cfg, &a);
        let got = log_target_upsilon(l, v1, cfg.a_upsilon, cfg.b_upsilon, true)
            - log_target_upsilon(l, v0, cfg.a_upsilon, cfg.b_upsilon, true);
        assert!((want - got).abs() < 1e-10, "upsilon: {want} vs {got}");

        a.latent.upsilon = l.upsilon;
        b.latent.upsilon = l.upsilon;
        a.latent.kappa = v0 * 10.0;
        b.latent.kappa = v1 * 10.0;
        let want = joint_log_density(&data, &cfg, &b) - joint_log_density(&data, &cfg, &a);
        let got = log_target_kappa(l, v1 * 10.0, cfg.a_kappa, cfg.b_kappa, true)
            - log_target_kappa(l, v0 * 10.0, cfg.a_kappa, cfg.b_kappa, true);
        assert!((want - got).abs() < 1e-10, "kappa: {want} vs {got}");
    }
}

#[test]
fn latent_count_targets_match_joint_density() {
    let (graph, data) = small_data();
    let cfg = SamplerConfig::default();
    let st = scrambled_state(&graph, &data, &cfg);
    for j in 0..st.latent.len() {
        let u = st.latent.u[j];
        for c1 in [u, u + 1, u + 4] {
            let mut b = st.clone();
            b.latent.c[j] = c1;
            let want = joint_log_density(&data, &cfg, &b) - joint_log_density(&data, &cfg, &st);
            let got = log_target_c(&st.latent, j, c1) - log_target_c(&st.latent, j, st.latent.c[j]);
            assert!((want - got).abs() < 1e-10, "c[{j}] -> {c1}: {want} vs {got}");
        }
        for u1 in 0..=st.latent.c[j] {
            let mut b = st.clone();
            b.latent.u[j] = u1;
            let want = joint_log_density(&data, &cfg, &b) - joint_log_density(&data, &cfg, &st);
            let got = log_target_u(&st.latent, j, u1) - log_target_u(&st.latent, j, u);
            assert!((want - got).abs() < 1e-10, "u[{j}] -> {u1}: {want} vs {got}");
        }
    }
}

#[test]
fn regression_targets_match_joint_density() {
    let (graph, data) = small_data();
    let cfg = SamplerConfig::default();
    let st = scrambled_state(&graph, &data, &cfg);
    let theta = st.theta_area();
    for prop in [vec![0.31, -0.25], vec![-1.0, 0.7]] {
        let mut b = st.clone();
        b.beta = prop.clone();
        let want = joint_log_density(&data, &cfg, &b) - joint_log_density(&data, &cfg, &st);
        let got = log_target_beta(&data, &cfg, &theta, &st.z, &prop)
            - log_target_beta(&data, &cfg, &theta, &st.z, &st.beta);
        assert!((want - got).abs() < 1e-10, "beta: {want} vs {got}");

        let mut b = st.clone();
        b.delta = prop.clone();
        let want = joint_log_density(&data, &cfg, &b) - joint_log_density(&data, &cfg, &st);
        let got = log_target_delta(&data, &cfg, &st.z, &prop) - log_target_delta(&data, &cfg, &st.z, &st.delta);
        assert!((want - got).abs() < 1e-10, "delta: {want} vs {got}");
    }
}

#[test]
fn independence_targets_drop_w() {
    let (graph, data) = small_data();
    let cfg = SamplerConfig {
        independent: true,
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut st = ChainState::initial(&graph, &data, &cfg, &mut rng).unwrap();
    assert_eq!(st.latent.len(), 3);
    st.latent.rho = vec![0.1, 0.5, 0.02];
    let mut b = st.clone();
    b.latent.upsilon = 4.0;
    let want = joint_log_density(&data, &cfg, &b) - joint_log_density(&data, &cfg, &st);
    let got = log_target_upsilon(&st.latent, 4.0, cfg.a_upsilon, cfg.b_upsilon, false)
        - log_target_upsilon(&st.latent, st.latent.upsilon, cfg.a_upsilon, cfg.b_upsilon, false);
    assert!((want - got).abs() < 1e-10);
}

#[test]
fn conjugate_hyper_draws() {
    let graph = SpatialGraph::path(3).unwrap();
    let data = data_free(3, 4, 0, vec![1.0; 12]);
    let cfg = SamplerConfig {
        q: 0,
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut st = ChainState::initial(&graph, &data, &cfg, &mut rng).unwrap();
    st.latent.c = vec![1, 0, 2, 3];
    st.latent.u = vec![1, 0, 1, 1];
    st.latent.upsilon = 1.0;
    st.latent.kappa = 1.0;
    let n = 100_000;
    let mut zeta = 0.0;
    let mut w = 0.0;
    for _ in 0..n {
        update_zeta(&mut st.latent, &cfg, &mut rng);
        update_w(&mut st.latent, &mut rng);
        zeta += st.latent.zeta;
        w += st.latent.w;
    }
    // Ga(1 + 6, 1 + 4) and Be(1 + 3, 1 + 3)
    assert!((zeta / n as f64 / (7.0 / 5.0) - 1.0).abs() < 0.01);
    assert!((w / n as f64 / (4.0 / 8.0) - 1.0).abs() < 0.01);
}

#[test]
fn rho_draw_matches_beta_mean() {
    let graph = SpatialGraph::path(5).unwrap();
    let data = data_free(5, 1, 0, vec![1.0; 5]);
    let cfg = SamplerConfig {
        q: 0,
        init_upsilon: Some(2.0),
        init_kappa: Some(6.0),
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut st = ChainState::initial(&graph, &data, &cfg, &mut rng).unwrap();
    let n = 100_000;
    let mut total = 0.0;
    for _ in 0..n {
        update_rho(&mut st, 0, &mut rng);
        total += st.latent.rho[0];
    }
    // k = 1: Be(υ, n - 1 + κ)
    let want = 2.0 / (2.0 + 4.0 + 6.0);
    assert!((total / n as f64 / want - 1.0).abs() < 0.01);
}

#[test]
fn theta_and_z_conjugate_draws() {
    let graph = SpatialGraph::path(1).unwrap();
    // one area, two weeks summing to y = 5 with exposure 2
    let data = Dataset::new(DatasetParts {
        n_areas: 1,
        n_seasons: 1,
        season_of_week: vec![0, 0],
        y: vec![2, 3],
        offset: vec![1.0, 1.0],
        p_mean: 0,
        x: vec![],
        p_disp: 1,
        v: vec![(4.0f64).ln()],
    })
    .unwrap();
    let cfg = SamplerConfig {
        init_delta: Some(vec![1.0]),
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut st = ChainState::initial(&graph, &data, &cfg, &mut rng).unwrap();
    let mut kernel = Kernel::new(&graph, &data, &cfg, &st);
    let n = 100_000;
    let mut theta = 0.0;
    for _ in 0..n {
        kernel.update_theta(&mut st, 0, &mut rng);
        theta += st.seasons[0].theta[0];
    }
    assert!((theta / n as f64 / 2.0 - 1.0).abs() < 0.01, "Ga(6, 3) mean");

    // with θ* pinned, z | y follows GIG(y - 1/2, 2 θ E + ψ, ψ); check mean by
    // quadrature of the unnormalized density
    st.seasons[0].theta = vec![1.5];
    let mut z = 0.0;
    for _ in 0..n {
        kernel.update_z(&mut st, 0, &mut rng).unwrap();
        assert!(st.z[0] > 0.0);
        z += st.z[0];
    }
    let (p, a, b) = (4.5, 2.0 * 1.5 * 2.0 + 4.0, 4.0);
    let dens = |x: f64| ((p - 1.0) * x.ln() - 0.5 * (a * x + b / x)).exp();
    let h = 1e-4;
    let (mut m0, mut m1) = (0.0, 0.0);
    let mut x = h;
    while x < 20.0 {
        m0 += dens(x);
        m1 += x * dens(x);
        x += h;
    }
    assert!((z / n as f64 / (m1 / m0) - 1.0).abs() < 0.01);
}

#[test]
fn partition_chain_matches_enumeration_on_path() {
    let graph = SpatialGraph::path(4).unwrap();
    let y = [3u64, 9, 1, 4];
    let offset = [1.0, 2.0, 1.0, 1.5];
    let data = Dataset::new(DatasetParts {
        n_areas: 4,
        n_seasons: 1,
        season_of_week: vec![0],
        y: y.to_vec(),
        offset: offset.to_vec(),
        p_mean: 0,
        x: vec![],
        p_disp: 1,
        v: vec![1.0; 4],
    })
    .unwrap();
    let cfg = SamplerConfig {
        n_iter: 60_000,
        burn_in: 1.0 / 60.0,
        thin: 1,
        q: 0,
        family: Family::Poisson,
        independent: true,
        init_upsilon: Some(2.0),
        init_kappa: Some(3.0),
        freeze: vec![Block::Upsilon, Block::Kappa, Block::Tree, Block::Beta],
        store_loglik: false,
        ..Default::default()
    };
    let mut rng = chain_rng(5, 0);
    let store = run_chain(&graph, &data, &cfg, &mut rng).unwrap();
    let exact = enumerate_path_posterior(&y, &offset, 2.0, 3.0, cfg.a_theta, cfg.b_theta);
    let tree = stppm_core::graph::random_spanning_tree(&graph, &mut rng);
    let mut freq = vec![0.0; 8];
    for draw in &store.partitions {
        let bits = indicators_for(&tree, &draw[0]);
        freq[bits.as_mask() as usize] += 1.0 / store.n_draws() as f64;
    }
    let tv: f64 = 0.5 * freq.iter().zip(&exact).map(|(f, e)| (f - e).abs()).sum::<f64>();
    assert!(tv < 0.02, "tv = {tv}, freq = {freq:?}, exact = {exact:?}");
}

#[test]
fn symmetric_split_has_equal_mass() {
    let graph = SpatialGraph::path(3).unwrap();
    let data = Dataset::new(DatasetParts {
        n_areas: 3,
        n_seasons: 1,
        season_of_week: vec![0],
        y: vec![2, 2, 2],
        offset: vec![1.0; 3],
        p_mean: 0,
        x: vec![],
        p_disp: 1,
        v: vec![1.0; 3],
    })
    .unwrap();
    let cfg = SamplerConfig {
        n_iter: 40_000,
        burn_in: 0.01,
        thin: 1,
        q: 0,
        family: Family::Poisson,
        independent: true,
        init_upsilon: Some(3.0),
        init_kappa: Some(3.0),
        freeze: vec![Block::Upsilon, Block::Kappa],
        store_loglik: false,
        ..Default::default()
    };
    let store = run_chain(&graph, &data, &cfg, &mut chain_rng(8, 0)).unwrap();
    let count = |labels: [usize; 3]| {
        store.partitions.iter().filter(|d| d[0].labels() == labels).count() as f64 / store.n_draws() as f64
    };
    let left = count([0, 1, 1]);
    let right = count([0, 0, 1]);
    assert!(left > 0.05 && (left - right).abs() < 0.02, "{left} vs {right}");
}

#[test]
fn same_seed_same_store() {
    let (graph, data) = small_data();
    let cfg = SamplerConfig {
        n_iter: 300,
        ..Default::default()
    };
    let a = run_chain(&graph, &data, &cfg, &mut chain_rng(21, 0)).unwrap();
    let b = run_chain(&graph, &data, &cfg, &mut chain_rng(21, 0)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.n_draws(), 30);
    let c = run_chain(&graph, &data, &cfg, &mut chain_rng(21, 1)).unwrap();
    assert_ne!(a.upsilon, c.upsilon);
}

#[test]
fn retained_partitions_stay_contiguous() {
    let graph = SpatialGraph::grid(3, 3).unwrap();
    let data = data_free(9, 3, 0, vec![1.0; 27]);
    let cfg = SamplerConfig {
        n_iter: 2_000,
        init_kappa: Some(2.0),
        init_upsilon: Some(2.0),
        freeze: vec![Block::Upsilon, Block::Kappa],
        ..Default::default()
    };
    let store = run_chain(&graph, &data, &cfg, &mut chain_rng(2, 0)).unwrap();
    let mut k_total = 0;
    for draw in &store.partitions {
        for p in draw {
            assert!(graph.is_contiguous(p));
            k_total += p.k();
        }
    }
    assert!(k_total > store.n_draws() * 3, "partitions should split under a loose prior");
}

#[test]
fn poisson_mode_holds_z_and_delta() {
    let (graph, data) = small_data();
    let cfg = SamplerConfig {
        n_iter: 200,
        family: Family::Poisson,
        ..Default::default()
    };
    let store = run_chain(&graph, &data, &cfg, &mut chain_rng(4, 0)).unwrap();
    assert!(store.z.iter().flatten().all(|&z| z == 1.0));
    assert!(store.delta.iter().flatten().all(|&d| d == 0.0));
    assert_eq!(store.loglik, store.loglik_conditional);
}

#[test]
fn independence_mode_keeps_counts_zero() {
    let (graph, data) = small_data();
    let cfg = SamplerConfig {
        n_iter: 200,
        independent: true,
        q: 2,
        ..Default::default()
    };
    let store = run_chain(&graph, &data, &cfg, &mut chain_rng(4, 0)).unwrap();
    assert_eq!(store.shape.q, 0);
    assert!(store.c.iter().flatten().all(|&c| c == 0));
    assert!(store.rho.iter().all(|r| r.len() == 3));
}

#[test]
fn horizon_cluster_counts_follow_prior() {
    // Data-free with pinned υ, κ: each slot's k - 1 is BeBin(n - 1, α, β)
    // given its window counts, and the windows average over c, u. Compare
    // the horizon slot against direct prior simulation.
    let graph = SpatialGraph::grid(3, 3).unwrap();
    let data = data_free(9, 1, 0, vec![1.0; 9]);
    let cfg = SamplerConfig {
        n_iter: 60_000,
        burn_in: 0.1,
        thin: 2,
        q: 1,
        init_upsilon: Some(2.0),
        init_kappa: Some(5.0),
        freeze: vec![Block::Upsilon, Block::Kappa],
        store_loglik: false,
        ..Default::default()
    };
    let store = run_chain(&graph, &data, &cfg, &mut chain_rng(6, 0)).unwrap();
    let chain_k: Vec<f64> = store.k.iter().map(|k| k[1] as f64).collect();

    // ζ is sampled in the chain, so mix the simulation over its prior
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let prior_k: Vec<f64> = (0..100_000)
        .map(|_| {
            let zeta = stppm_core::dist::gamma_rate(&mut rng, 1.0, 1.0);
            let p = prior_predictive_partitions_given(2.0, 5.0, zeta, 1, &graph, 2, 1, &mut rng);
            p[0][1].k() as f64
        })
        .collect();
    let (mc, mp) = (mean(&chain_k), mean(&prior_k));
    let se = batch_mcse(&chain_k);
    assert!((mc - mp).abs() < 4.0 * se + 0.02, "chain {mc} vs prior {mp} (se {se})");
}
