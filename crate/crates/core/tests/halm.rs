mod common;

use common::{random_field, random_unit, random_vector, rng, shape};
use elastica::gradcheck::{finite_difference_n, FD_STEP};
use elastica::{
    add_noise, energy, energy_general, grad, grad_n, grad_n_trv, halm_solve, halm_solve_general,
    lipschitz_n, synth_image, update_n, update_q, update_q_general, update_u, Boundary,
    CurvaturePenalty, ElasticaParams, GridShape, NoiseSpec, ScalarField, SolverState, StepPolicy,
    SynthKind, VectorField2,
};

/// Energy by explicit periodic index arithmetic, independent of the grid
/// operators.
fn energy_oracle(
    f: &ScalarField,
    u: &ScalarField,
    n: &VectorField2,
    q: &ScalarField,
    phi: impl Fn(f64) -> f64,
    alpha: f64,
) -> f64 {
    let s = f.shape();
    let (h, w) = (s.height(), s.width());
    let mut total = 0.0;
    for r in 0..h {
        for c in 0..w {
            let (rp, cp) = ((r + h - 1) % h, (c + w - 1) % w);
            let kappa = n.x.get(r, c) - n.x.get(r, cp) + n.y.get(r, c) - n.y.get(rp, c);
            let ux = u.get(r, (c + 1) % w) - u.get(r, c);
            let uy = u.get((r + 1) % h, c) - u.get(r, c);
            let qq = q.get(r, c);
            let ex = ux - qq * n.x.get(r, c);
            let ey = uy - qq * n.y.get(r, c);
            let d = u.get(r, c) - f.get(r, c);
            total += phi(kappa) * qq + 0.5 * d * d + 0.5 * alpha * (ex * ex + ey * ey);
        }
    }
    total
}

struct Inst {
    f: ScalarField,
    u: ScalarField,
    n: VectorField2,
    q: ScalarField,
    p: ElasticaParams,
}

fn instance(seed: u64, s: GridShape) -> Inst {
    let mut r = rng(seed);
    Inst {
        f: random_field(&mut r, s, 0.0, 1.0),
        u: random_field(&mut r, s, 0.0, 1.0),
        n: random_unit(&mut r, s),
        q: random_field(&mut r, s, 0.0, 1.0),
        p: ElasticaParams {
            a: 0.1 + 0.9 * (seed % 7) as f64 / 7.0,
            b: 0.1 + 0.9 * (seed % 5) as f64 / 5.0,
            alpha: 0.5 + (seed % 9) as f64 / 2.0,
            ..Default::default()
        },
    }
}

fn noisy_disk(size: usize, seed: u64) -> (ScalarField, ScalarField) {
    let clean = synth_image(SynthKind::Disk, shape(size, size, Boundary::Periodic));
    let noisy = add_noise(&clean, &NoiseSpec::gaussian(0.0015, seed)).unwrap();
    (clean, noisy)
}

#[test]
fn energy_matches_summation_oracle() {
    for seed in 0..10 {
        let i = instance(seed, shape(5, 7, Boundary::Periodic));
        let (a, b) = (i.p.a, i.p.b);
        let got = energy(&i.f, &i.u, &i.n, &i.q, &i.p);
        let want = energy_oracle(&i.f, &i.u, &i.n, &i.q, |k| a + b * k * k, i.p.alpha);
        assert!((got - want).abs() <= 1e-12 * want.abs());

        let trv = CurvaturePenalty::trv(a, b).unwrap();
        let got = energy_general(&i.f, &i.u, &i.n, &i.q, &trv, i.p.alpha);
        let want = energy_oracle(
            &i.f,
            &i.u,
            &i.n,
            &i.q,
            |k| (a + b * k * k).sqrt(),
            i.p.alpha,
        );
        assert!((got - want).abs() <= 1e-12 * want.abs());
    }
}

#[test]
fn energy_of_initial_state_is_curvature_term_only() {
    let (_, f) = noisy_disk(16, 1);
    let p = ElasticaParams::default();
    let s = SolverState::initial(&f);
    let e = energy(&f, &s.u, &s.n, &s.q, &p);
    let kappa = elastica::div(&s.n);
    let expected: f64 = kappa
        .values()
        .iter()
        .zip(s.q.values())
        .map(|(k, q)| (p.a + p.b * k * k) * q)
        .sum();
    assert!((e - expected).abs() < 1e-10);
}

#[test]
fn gradients_match_finite_differences_of_oracle() {
    for seed in 0..20 {
        let i = instance(seed, shape(6, 6, Boundary::Periodic));
        let (a, b, alpha) = (i.p.a, i.p.b, i.p.alpha);

        let exact = grad_n(&i.u, &i.n, &i.q, &i.p);
        let fd = finite_difference_n(&i.n, FD_STEP, |n| {
            energy_oracle(&i.f, &i.u, n, &i.q, |k| a + b * k * k, alpha)
        });
        let err = fd.sub(&exact).norm() / exact.norm();
        assert!(err <= 1e-5, "elastica seed {seed}: {err}");

        let exact = grad_n_trv(&i.u, &i.n, &i.q, a, b, alpha);
        let fd = finite_difference_n(&i.n, FD_STEP, |n| {
            energy_oracle(&i.f, &i.u, n, &i.q, |k| (a + b * k * k).sqrt(), alpha)
        });
        let err = fd.sub(&exact).norm() / exact.norm();
        assert!(err <= 1e-5, "trv seed {seed}: {err}");
    }
}

#[test]
fn gradcheck_report_is_small() {
    let report = elastica::gradcheck::run(7, 20);
    assert_eq!(report.instances, 20);
    assert!(report.max_rel_err() <= 1e-5, "{report:?}");
}

/// Minimises `phi q + alpha/2 |g - q n|^2` over a grid on `[0, 10]`.
fn brute_force_q(phi: f64, g: [f64; 2], n: [f64; 2], alpha: f64) -> f64 {
    let objective = |q: f64| {
        let (ex, ey) = (g[0] - q * n[0], g[1] - q * n[1]);
        phi * q + 0.5 * alpha * (ex * ex + ey * ey)
    };
    let mut best = (f64::INFINITY, 0.0);
    for k in 0..=100_000 {
        let q = k as f64 * 1e-4;
        let v = objective(q);
        if v < best.0 {
            best = (v, q);
        }
    }
    best.1
}

#[test]
fn q_step_matches_brute_force() {
    let s = shape(25, 40, Boundary::Periodic);
    let mut r = rng(99);
    let u = random_field(&mut r, s, 0.0, 4.0);
    let n = random_unit(&mut r, s);
    let g = grad(&u);
    let kappa = elastica::div(&n);
    let p = ElasticaParams {
        a: 0.2,
        b: 0.05,
        alpha: 2.0,
        ..Default::default()
    };
    let trv = CurvaturePenalty::trv(0.2, 0.05).unwrap();
    let q_ee = update_q(&u, &n, &p);
    let q_trv = update_q_general(&u, &n, &trv, p.alpha);
    let mut positive = 0;
    for i in 0..s.len() {
        let (gi, ni, k) = (
            [g.x.values()[i], g.y.values()[i]],
            [n.x.values()[i], n.y.values()[i]],
            kappa.values()[i],
        );
        let want = brute_force_q(p.a + p.b * k * k, gi, ni, p.alpha);
        assert!((q_ee.values()[i] - want).abs() <= 1e-4, "ee pixel {i}");
        let want = brute_force_q(trv.phi(k), gi, ni, p.alpha);
        assert!((q_trv.values()[i] - want).abs() <= 1e-4, "trv pixel {i}");
        positive += usize::from(want > 0.0);
    }
    // both branches of the max are exercised
    assert!(positive > 100 && positive < s.len() - 100, "{positive}");
}

#[test]
fn lipschitz_is_exact_for_constant_q_without_curvature() {
    let s = shape(16, 16, Boundary::Periodic);
    for (c, alpha) in [(0.5, 4.0), (2.0, 1.0), (1.3, 10.0)] {
        let q = ScalarField::filled(s, c);
        let p = ElasticaParams {
            b: 1e-300,
            alpha,
            ..Default::default()
        };
        let l = lipschitz_n(&q, &p);
        let exact = alpha * c * c;
        assert!((l - exact).abs() <= 0.01 * exact, "{l} vs {exact}");
    }
}

#[test]
fn lipschitz_bounds_rayleigh_quotients() {
    let s = shape(12, 12, Boundary::Periodic);
    let mut r = rng(21);
    for _ in 0..5 {
        let q = random_field(&mut r, s, 0.0, 2.0);
        let u = random_field(&mut r, s, 0.0, 1.0);
        let p = ElasticaParams {
            a: 0.3,
            b: 0.4,
            alpha: 3.0,
            ..Default::default()
        };
        let l = lipschitz_n(&q, &p);
        let analytic = 16.0 * p.b * q.norm_inf() + p.alpha * q.norm_inf().powi(2);
        assert!(l <= analytic * (1.0 + 1e-12));
        // grad_n is affine in n: Q v = grad_n(v) - grad_n(0)
        let base = grad_n(&u, &VectorField2::zeros(s), &q, &p);
        for _ in 0..20 {
            let v = random_vector(&mut r, s);
            let qv = grad_n(&u, &v, &q, &p).sub(&base);
            let rayleigh = v.dot(&qv) / v.norm_sq();
            assert!(rayleigh >= -1e-12, "Q must be PSD");
            assert!(rayleigh <= l, "{rayleigh} > {l}");
        }
    }
}

#[test]
fn blocks_each_decrease_energy() {
    let (_, f) = noisy_disk(24, 3);
    let p = ElasticaParams::default();
    let mut state = SolverState::initial(&f);
    for _ in 0..30 {
        let e0 = energy(&f, &state.u, &state.n, &state.q, &p);
        let u = update_u(&f, &state, &p).unwrap();
        let e1 = energy(&f, &u, &state.n, &state.q, &p);
        assert!(e1 <= e0 + 1e-9, "u-step {e0} -> {e1}");
        let tau = 0.99 / lipschitz_n(&state.q, &p);
        let n = update_n(&state, &u, tau, &p);
        let e2 = energy(&f, &u, &n, &state.q, &p);
        assert!(e2 <= e1 + 1e-9, "n-step {e1} -> {e2}");
        let q = update_q(&u, &n, &p);
        let e3 = energy(&f, &u, &n, &q, &p);
        assert!(e3 <= e2 + 1e-9, "q-step {e2} -> {e3}");
        state = SolverState {
            u,
            n,
            q,
            k: state.k + 1,
        };
    }
}

#[test]
fn u_step_solves_its_subproblem() {
    let i = instance(4, shape(8, 9, Boundary::Periodic));
    let state = SolverState {
        u: i.u.clone(),
        n: i.n.clone(),
        q: i.q.clone(),
        k: 0,
    };
    let u = update_u(&i.f, &state, &i.p).unwrap();
    let e = |u: &ScalarField| energy(&i.f, u, &i.n, &i.q, &i.p);
    // strongly convex quadratic with Hessian >= I: E(u + d) >= E(u*) + |d|^2/2
    let mut r = rng(5);
    let base = e(&u);
    for _ in 0..20 {
        let d = random_field(&mut r, u.shape(), -0.1, 0.1);
        let moved = u.zip_map(&d, |a, b| a + b);
        assert!(e(&moved) >= base + 0.5 * d.norm_sq() * (1.0 - 1e-9));
    }
    // vanishing coupling returns the data
    let weak = ElasticaParams {
        alpha: 1e-12,
        ..i.p
    };
    assert!(update_u(&i.f, &state, &weak).unwrap().max_abs_diff(&i.f) < 1e-9);
}

#[test]
fn adaptive_runs_satisfy_descent_inequality() {
    for seed in 0..10 {
        let (_, f) = noisy_disk(32, seed);
        let p = ElasticaParams {
            step: StepPolicy::Adaptive { safety: 0.9 },
            max_iter: 60,
            ..Default::default()
        };
        let sol = halm_solve(&f, &p).unwrap();
        let mut prev = sol.trace.initial_energy;
        for rec in &sol.trace.records {
            let gain = prev - rec.energy;
            let bound = 0.5 * rec.du_norm.powi(2)
                + 0.5 * (1.0 / rec.step_tau - rec.lipschitz) * rec.dn_norm.powi(2)
                + 0.5 * p.alpha * rec.dq_norm.powi(2);
            assert!(
                gain >= -1e-9,
                "seed {seed} k={} energy rose by {}",
                rec.k,
                -gain
            );
            assert!(
                gain >= bound - 1e-9,
                "seed {seed} k={}: {gain} < {bound}",
                rec.k
            );
            prev = rec.energy;
        }
    }
}

#[test]
fn adaptive_trv_runs_descend() {
    let clean = synth_image(SynthKind::Shading, shape(32, 32, Boundary::Periodic));
    let f = add_noise(&clean, &NoiseSpec::gaussian(0.0015, 8)).unwrap();
    let trv = CurvaturePenalty::trv(0.015, 0.005).unwrap();
    let p = ElasticaParams {
        alpha: 4.0,
        step: StepPolicy::Adaptive { safety: 0.9 },
        max_iter: 60,
        ..Default::default()
    };
    let sol = halm_solve_general(&f, &trv, &p).unwrap();
    let mut prev = sol.trace.initial_energy;
    for rec in &sol.trace.records {
        let bound = 0.5 * rec.du_norm.powi(2)
            + 0.5 * (1.0 / rec.step_tau - rec.lipschitz) * rec.dn_norm.powi(2)
            + 0.5 * p.alpha * rec.dq_norm.powi(2);
        assert!(prev - rec.energy >= bound - 1e-9, "k={}", rec.k);
        prev = rec.energy;
    }
}

#[test]
fn iterates_stay_feasible_and_bounded() {
    for (seed, size, max_iter) in [(1, 20, 1), (2, 20, 5), (3, 24, 40), (4, 16, 200)] {
        let (_, f) = noisy_disk(size, seed);
        let p = ElasticaParams {
            max_iter,
            ..Default::default()
        };
        let sol = halm_solve(&f, &p).unwrap();
        assert!(sol.u.is_finite() && sol.n.is_finite() && sol.q.is_finite());
        assert!(sol.q.values().iter().all(|&v| v >= 0.0));
        for m in sol.n.magnitude().values() {
            assert!((m - 1.0).abs() < 1e-12);
        }
        assert!(sol.u.norm_inf() <= f.norm_inf() + 10.0);
        assert!(sol.trace.records.iter().all(|r| r.energy.is_finite()));
    }
}

#[test]
fn trace_records_are_consistent() {
    let (_, f) = noisy_disk(24, 6);
    let sol = halm_solve(&f, &ElasticaParams::default()).unwrap();
    let t = &sol.trace;
    assert!(t.converged);
    assert_eq!(t.iterations(), t.records.len());
    for (i, r) in t.records.iter().enumerate() {
        assert_eq!(r.k, i + 1);
        assert_eq!(r.step_tau, 0.1);
    }
    assert!(t.final_rel_err().unwrap() < 1e-5);
    assert!(t.records[..t.records.len() - 1]
        .iter()
        .skip(1)
        .all(|r| r.rel_err >= 1e-5));
    assert!(t
        .records
        .windows(2)
        .all(|w| w[0].wall_time_ms <= w[1].wall_time_ms));
}

#[test]
fn solver_is_deterministic() {
    let (_, f) = noisy_disk(20, 9);
    let p = ElasticaParams {
        step: StepPolicy::Adaptive { safety: 0.9 },
        max_iter: 30,
        ..Default::default()
    };
    let a = halm_solve(&f, &p).unwrap();
    let b = halm_solve(&f, &p).unwrap();
    assert_eq!(a.u, b.u);
    assert_eq!(a.trace.energies(), b.trace.energies());
}
