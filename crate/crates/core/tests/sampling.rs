use gbsdock::gbs::{
    build_encoding, hafnian, mean_clicks, state_from_encoding, threshold_distribution, threshold_probability,
    tune_c_for_clicks, ClickPattern, ScaleChoice,
};
use gbsdock::harness::{generate_planted_instance, PlantedParams};
use gbsdock::samplers::{
    classical_baseline, estimate_moments, postselection_weights, sample_postselected, sample_threshold_chain,
};
use gbsdock::solvers::hybrid_pipeline;
use gbsdock::WeightedGraph;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_graph(seed: u64, n: usize, density: f64) -> WeightedGraph {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let weights = (0..n).map(|_| r.random::<f64>()).collect();
    let mut adj = vec![false; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let e = r.random::<f64>() < density;
            adj[i * n + j] = e;
            adj[j * n + i] = e;
        }
    }
    WeightedGraph::from_fn(weights, |i, j| adj[i * n + j]).unwrap()
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        for &k in &idx[i..=j] {
            out[k] = (i + j) as f64 / 2.0;
        }
        i = j + 1;
    }
    out
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma) * (x - ma)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb) * (y - mb)).sum();
    cov / (va * vb).sqrt()
}

#[test]
fn collision_free_weights_rank_threshold_probabilities() {
    let g = random_graph(7, 8, 0.8);
    let e = build_encoding(&g, 1.0, ScaleChoice::Fixed(0.05)).unwrap();
    let s = state_from_encoding(&e).unwrap();
    let mut probs = Vec::new();
    let mut weights = Vec::new();
    for bits in 0u64..256 {
        if bits.count_ones() != 4 {
            continue;
        }
        let members: Vec<usize> = (0..8).filter(|i| bits >> i & 1 == 1).collect();
        let a = DMatrix::from_fn(4, 4, |i, j| {
            if i != j && g.has_edge(members[i], members[j]) {
                1.0
            } else {
                0.0
            }
        });
        let det: f64 = members.iter().map(|&v| e.omega()[v]).product();
        weights.push((det * hafnian(&a).unwrap()).powi(2));
        probs.push(threshold_probability(&s, &ClickPattern::from_bits(bits, 8)).unwrap());
    }
    assert_eq!(probs.len(), 70);
    let rho = pearson(&ranks(&probs), &ranks(&weights));
    assert!(rho >= 0.99, "rank correlation {rho}");
}

#[test]
fn postselected_weights_match_conditional_threshold_distribution() {
    // collisions vanish only as c -> 0; at 0.02 mean clicks the 4-click slice is near collision-free
    let g = random_graph(11, 8, 0.7);
    let e = tune_c_for_clicks(&g, 1.0, 0.02, 1.0).unwrap();
    let s = state_from_encoding(&e).unwrap();
    let n = 4;
    let exact = threshold_distribution(&s).unwrap();
    let mask_total: f64 = (0u64..256).filter(|b| b.count_ones() == n).map(|b| exact[b as usize]).sum();
    let conditional = |b: u64| exact[b as usize] / mask_total;
    let weights = postselection_weights(&e, n as usize).unwrap();
    let w_total: f64 = weights.iter().map(|(_, w)| w).sum();
    let tvd_exact: f64 = 0.5 * weights.iter().map(|&(b, w)| (w / w_total - conditional(b)).abs()).sum::<f64>();
    assert!(tvd_exact <= 0.02, "exact TVD {tvd_exact}");

    // 4-click events have probability ~1e-5 here, so the sampled side is the post-selected sampler alone
    let post = sample_postselected(&e, n as usize, 200_000, 4).unwrap();
    let mut freq = vec![0.0; 256];
    for p in &post.patterns {
        freq[p.to_bits() as usize] += 1.0 / post.len() as f64;
    }
    let tvd: f64 = 0.5
        * (0u64..256)
            .filter(|b| b.count_ones() == n)
            .map(|b| (freq[b as usize] - conditional(b)).abs())
            .sum::<f64>();
    assert!(tvd <= 0.02, "sampled TVD {tvd}");
}

#[test]
fn relabelling_modes_permutes_probabilities() {
    let g = random_graph(5, 6, 0.6);
    let e = tune_c_for_clicks(&g, 1.0, 1.5, 1.0).unwrap();
    let s = state_from_encoding(&e).unwrap();
    let perm = [3, 0, 5, 1, 4, 2];
    let t = s.permute_modes(&perm).unwrap();
    let (ps, pt) = (threshold_distribution(&s).unwrap(), threshold_distribution(&t).unwrap());
    for bits in 0u64..64 {
        // mode k of t is mode perm[k] of s
        let mut orig = 0u64;
        for (k, &p) in perm.iter().enumerate() {
            if bits >> k & 1 == 1 {
                orig |= 1 << p;
            }
        }
        assert!((pt[bits as usize] - ps[orig as usize]).abs() < 1e-12, "pattern {bits:06b}");
    }
}

#[test]
fn empirical_mean_clicks_match_closed_form() {
    let g = random_graph(9, 10, 0.5);
    let e = build_encoding(&g, 1.0, ScaleChoice::Auto).unwrap();
    let e = build_encoding(&g, 1.0, ScaleChoice::Fixed(0.8 * e.c())).unwrap();
    let s = state_from_encoding(&e).unwrap();
    let batch = sample_threshold_chain(&s, 100_000, 17).unwrap();
    let (mean, var) = estimate_moments(&batch).unwrap();
    let se = (var / batch.len() as f64).sqrt();
    let expected = mean_clicks(&s);
    assert!((mean - expected).abs() <= 3.0 * se, "{mean} vs {expected} (se {se})");
}

#[test]
fn classical_baseline_moments_and_uniformity() {
    let (m, mean, var) = (24, 8.0, 6.0);
    let batch = classical_baseline(m, mean, var, 100_000, 5).unwrap();
    let (got_mean, got_var) = estimate_moments(&batch).unwrap();
    // rounding adds 1/12 to the variance; clamping to [0, 24] is negligible here
    assert!((got_mean - mean).abs() < 0.05, "{got_mean}");
    assert!((got_var - (var + 1.0 / 12.0)).abs() < 0.2, "{got_var}");

    let fixed = classical_baseline(m, 8.0, 0.0, 100_000, 6).unwrap();
    assert!(fixed.click_counts().iter().all(|&c| c == 8));
    let mut single = vec![0.0; m];
    let mut pair = 0.0;
    for p in &fixed.patterns {
        for (i, &c) in p.clicks().iter().enumerate() {
            single[i] += f64::from(u8::from(c));
        }
        pair += f64::from(u8::from(p.clicks()[0] && p.clicks()[1]));
    }
    let count = fixed.len() as f64;
    for s in &single {
        assert!((s / count - 8.0 / 24.0).abs() < 0.01);
    }
    let expected_pair = 8.0 * 7.0 / (24.0 * 23.0);
    assert!((pair / count - expected_pair).abs() < 0.005, "{}", pair / count);
}

#[test]
fn sampling_and_solving_are_deterministic_across_thread_counts() {
    let inst = generate_planted_instance(&PlantedParams::default()).unwrap();
    let g = &inst.graph;
    let e = build_encoding(g, 1.0, ScaleChoice::Fixed(0.12)).unwrap();
    let s = state_from_encoding(&e).unwrap();
    let run = || {
        let batch = sample_threshold_chain(&s, 600, 21).unwrap();
        let solved = hybrid_pipeline(g, &batch, 10, 22).unwrap();
        (batch, solved)
    };
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(run);
    let multi = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap().install(run);
    assert_eq!(single.0.patterns, multi.0.patterns);
    assert_eq!(single.1, multi.1);
    assert_eq!(run().0.patterns, single.0.patterns);
}
