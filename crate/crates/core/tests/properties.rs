mod common;

use common::*;
use proptest::prelude::*;
use splitcone::cones::{project_dual_cone, project_embedding_cone, project_primal_cone, symmetric_eig, BlockKind};
use splitcone::embedding::{apply_q, EmbeddingCache, LinsysConfig};
use splitcone::io::{problem_from_str, problem_to_string, solution_from_str, solution_to_string, SolutionFile};
use splitcone::linalg::{build_kkt, cg_solve, ldl_factor, ldl_solve, Ordering};
use splitcone::probgen::{generate, GeneratorParams, LpKind, Sampler};
use splitcone::scaling::{block_row_norms, equilibrate};
use splitcone::{solve, ProblemData, Settings, SparseMatrix};

fn config() -> ProptestConfig {
    ProptestConfig { cases: 64, ..ProptestConfig::default() }
}

fn problem(seed: u64) -> (ProblemData, Sampler) {
    let mut rng = Sampler::new(seed);
    let p = random_problem(&mut rng, 8);
    (p, rng)
}

fn direct(data: &ProblemData) -> EmbeddingCache {
    EmbeddingCache::new(data, LinsysConfig::Direct { ordering: Ordering::Amd }).unwrap()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn random_sparse(rng: &mut Sampler, m: usize, n: usize, density: f64) -> SparseMatrix {
    let mut trip = Vec::new();
    for j in 0..n {
        for i in 0..m {
            if rng.uniform() < density {
                trip.push((i, j, rng.normal()));
            }
        }
    }
    SparseMatrix::from_triplets(m, n, &trip).unwrap()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn moreau_decomposition(seed in any::<u64>(), scale in 0.01f64..100.0) {
        let (data, mut rng) = problem(seed);
        let x = random_vec(&mut rng, data.m(), scale);
        let pk = project_primal_cone(&x, &data.cone).unwrap();
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let pd: Vec<f64> = project_dual_cone(&neg, &data.cone).unwrap().iter().map(|v| -v).collect();
        let resid: Vec<f64> = (0..x.len()).map(|i| x[i] - pk[i] - pd[i]).collect();
        prop_assert!(norm(&resid) <= 1e-10 * (1.0 + norm(&x)));
        prop_assert!(dot(&pk, &pd).abs() <= 1e-10 * (1.0 + dot(&x, &x)));
    }

    #[test]
    fn projections_are_idempotent(seed in any::<u64>()) {
        let (data, mut rng) = problem(seed);
        let n = data.n();
        let x = random_vec(&mut rng, data.m(), 3.0);
        let u = random_vec(&mut rng, n + data.m() + 1, 3.0);
        let p1 = project_primal_cone(&x, &data.cone).unwrap();
        let d1 = project_dual_cone(&x, &data.cone).unwrap();
        let e1 = project_embedding_cone(&u, n, &data.cone).unwrap();
        let pairs = [
            (project_primal_cone(&p1, &data.cone).unwrap(), p1),
            (project_dual_cone(&d1, &data.cone).unwrap(), d1),
            (project_embedding_cone(&e1, n, &data.cone).unwrap(), e1),
        ];
        for (twice, once) in &pairs {
            prop_assert!(dist(twice, once) <= 1e-12 * (1.0 + norm(once)));
        }
    }

    #[test]
    fn projections_are_nonexpansive(seed in any::<u64>()) {
        let (data, mut rng) = problem(seed);
        let x = random_vec(&mut rng, data.m(), 2.0);
        let y = random_vec(&mut rng, data.m(), 2.0);
        let d = dist(&x, &y);
        let pk = dist(&project_primal_cone(&x, &data.cone).unwrap(), &project_primal_cone(&y, &data.cone).unwrap());
        let pd = dist(&project_dual_cone(&x, &data.cone).unwrap(), &project_dual_cone(&y, &data.cone).unwrap());
        prop_assert!(pk <= d + 1e-12);
        prop_assert!(pd <= d + 1e-12);
    }

    #[test]
    fn projections_match_reference(seed in any::<u64>()) {
        let (data, mut rng) = problem(seed);
        let x = random_vec(&mut rng, data.m(), 2.0);
        let ours = project_primal_cone(&x, &data.cone).unwrap();
        let reference = proj_cone(&x, &data.cone, false);
        prop_assert!(dist(&ours, &reference) <= 1e-9 * (1.0 + norm(&x)));
    }

    #[test]
    fn primal_projection_lands_in_cone(seed in any::<u64>()) {
        let (data, mut rng) = problem(seed);
        let x = random_vec(&mut rng, data.m(), 5.0);
        let p = project_primal_cone(&x, &data.cone).unwrap();
        for b in data.cone.blocks() {
            let seg = &p[b.range()];
            match b.kind {
                BlockKind::Zero => prop_assert!(seg.iter().all(|&v| v == 0.0)),
                BlockKind::Nonneg => prop_assert!(seg.iter().all(|&v| v >= -1e-12)),
                BlockKind::Soc => prop_assert!(seg[0] >= norm(&seg[1..]) - 1e-9),
                BlockKind::Psd(side) => {
                    let dense = splitcone::cones::PackedSymmetric::new(side, seg.to_vec()).unwrap().to_dense();
                    let eig = symmetric_eig(&dense, side).unwrap();
                    let min = eig.values.iter().copied().fold(f64::INFINITY, f64::min);
                    prop_assert!(min >= -1e-9 * (1.0 + norm(seg)));
                }
            }
        }
    }

    #[test]
    fn adjoint_identity(seed in any::<u64>(), m in 1usize..30, n in 1usize..30) {
        let mut rng = Sampler::new(seed);
        let a = random_sparse(&mut rng, m, n, 0.3);
        let x = random_vec(&mut rng, n, 1.0);
        let y = random_vec(&mut rng, m, 1.0);
        let lhs = dot(&y, &a.spmv(&x).unwrap());
        let rhs = dot(&a.spmv_t(&y).unwrap(), &x);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * a.frobenius_norm() * norm(&x) * norm(&y) + 1e-300);
    }

    #[test]
    fn ldl_round_trip(seed in any::<u64>(), m in 1usize..25, n in 1usize..25) {
        let mut rng = Sampler::new(seed);
        let a = random_sparse(&mut rng, m, n, 0.25);
        let kkt = build_kkt(&a);
        let w = random_vec(&mut rng, n + m, 1.0);
        for ordering in [Ordering::Amd, Ordering::Natural] {
            let f = ldl_factor(&kkt, ordering).unwrap();
            let z = ldl_solve(&f, &w).unwrap();
            let mz = kkt.spmv(&z).unwrap();
            prop_assert!(dist(&mz, &w) <= 1e-8 * (1.0 + norm(&w)));
        }
    }

    // Single CG steps may raise the Euclidean residual; a run to the
    // tolerance must end below where it started.
    #[test]
    fn cg_converged_residual_is_below_initial(seed in any::<u64>(), m in 1usize..20, n in 1usize..20) {
        let mut rng = Sampler::new(seed);
        let a = random_sparse(&mut rng, m, n, 0.4);
        let rhs = random_vec(&mut rng, n, 1.0);
        let apply = |x: &[f64], out: &mut [f64]| {
            let ax = a.spmv(x).unwrap();
            let atax = a.spmv_t(&ax).unwrap();
            for j in 0..n {
                out[j] = x[j] + atax[j];
            }
        };
        let tol = 1e-10 * norm(&rhs);
        let res = cg_solve(apply, &rhs, &vec![0.0; n], tol, 4 * n).unwrap();
        prop_assert!(res.residual_norm <= norm(&rhs));
        prop_assert!(res.residual_norm <= tol);
    }

    #[test]
    fn q_is_skew(seed in any::<u64>()) {
        let (data, mut rng) = problem(seed);
        let u = random_vec(&mut rng, data.n() + data.m() + 1, 1.0);
        let qu = apply_q(&data, &u).unwrap();
        prop_assert!(dot(&u, &qu).abs() <= 1e-12 * dot(&u, &u).max(1.0));
    }

    #[test]
    fn affine_projection_is_linear(seed in any::<u64>(), alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
        let (data, mut rng) = problem(seed);
        let mut cache = direct(&data);
        let len = data.n() + data.m() + 1;
        let w1 = random_vec(&mut rng, len, 1.0);
        let w2 = random_vec(&mut rng, len, 1.0);
        let mix: Vec<f64> = (0..len).map(|i| alpha * w1[i] + beta * w2[i]).collect();
        let p1 = cache.project_affine(&data, &w1).unwrap();
        let p2 = cache.project_affine(&data, &w2).unwrap();
        let pm = cache.project_affine(&data, &mix).unwrap();
        let want: Vec<f64> = (0..len).map(|i| alpha * p1[i] + beta * p2[i]).collect();
        prop_assert!(dist(&pm, &want) <= 1e-9 * (1.0 + norm(&want)));
    }

    #[test]
    fn affine_map_is_nonexpansive(seed in any::<u64>()) {
        let (data, mut rng) = problem(seed);
        let mut cache = direct(&data);
        let len = data.n() + data.m() + 1;
        let (u1, v1) = (random_vec(&mut rng, len, 1.0), random_vec(&mut rng, len, 1.0));
        let (u2, v2) = (random_vec(&mut rng, len, 1.0), random_vec(&mut rng, len, 1.0));
        let mut l = |u: &[f64], v: &[f64]| {
            let w: Vec<f64> = u.iter().zip(v).map(|(a, b)| a + b).collect();
            sub(&cache.project_affine(&data, &w).unwrap(), v)
        };
        let before = (dist(&u1, &u2).powi(2) + dist(&v1, &v2).powi(2)).sqrt();
        let after = dist(&l(&u1, &v1), &l(&u2, &v2));
        prop_assert!(after <= before + 1e-9);

        let w = random_vec(&mut rng, len, 1.0);
        prop_assert!(norm(&cache.project_affine(&data, &w).unwrap()) <= norm(&w) + 1e-9);
    }

    #[test]
    fn problem_file_round_trip(seed in any::<u64>()) {
        let (data, _) = problem(seed);
        let text = problem_to_string(&data);
        prop_assert_eq!(problem_from_str(&text).unwrap(), data);
    }

    #[test]
    fn solution_file_round_trip(seed in 0u64..1000) {
        let inst = generate(GeneratorParams::Lp { kind: LpKind::Feasible, n: 4, m: 8 }, seed).unwrap();
        let sol = solve(&inst, &Settings { max_iters: 50, ..Settings::default() }).unwrap();
        let file = SolutionFile::from(&sol);
        prop_assert_eq!(solution_from_str(&solution_to_string(&file)).unwrap(), file);
    }

    #[test]
    fn equilibration_respects_blocks_and_band(seed in any::<u64>()) {
        let (data, _) = problem(seed);
        let (scaled, scal) = equilibrate(&data, Settings::default().sweeps);
        for b in data.cone.blocks() {
            if matches!(b.kind, BlockKind::Soc | BlockKind::Psd(_)) {
                let d = &scal.d[b.range()];
                let (lo, hi) = d.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
                prop_assert_eq!(lo, hi);
            }
        }
        for c in scaled.a.col_norms().into_iter().filter(|&v| v > 0.0) {
            prop_assert!((0.1..=10.0).contains(&c), "column norm {}", c);
        }
        for r in block_row_norms(&scaled.a, &scaled.cone).into_iter().filter(|&v| v > 0.0) {
            prop_assert!((0.1..=10.0).contains(&r), "row norm {}", r);
        }
        prop_assert!(scal.d.iter().chain(&scal.e).all(|v| v.is_finite() && *v > 0.0));
    }

    #[test]
    fn generated_problems_validate_and_round_trip(seed in 0u64..10_000, which in 0usize..6) {
        let params = match which {
            0 => GeneratorParams::Lasso { p: 10, q: 4 },
            1 => GeneratorParams::Portfolio { p: 6, q: 2 },
            2 => GeneratorParams::Rpca { p: 3, r: 1 },
            3 => GeneratorParams::Lp { kind: LpKind::Feasible, n: 3, m: 6 },
            4 => GeneratorParams::Lp { kind: LpKind::Infeasible, n: 3, m: 6 },
            _ => GeneratorParams::Lp { kind: LpKind::Unbounded, n: 3, m: 6 },
        };
        let data = generate(params, seed).unwrap();
        prop_assert!(data.validate().is_ok());
        prop_assert_eq!(problem_from_str(&problem_to_string(&data)).unwrap(), data);
    }
}
