use proptest::prelude::*;
use todaflow_core::dyson::{self, GasConfig, GasState};
use todaflow_core::fourier;
use todaflow_core::growth::{self, FlowKind, FlowSpec, PotentialSpec, Resolution};
use todaflow_core::hydro::{solve_characteristics, Profile};
use todaflow_core::loewner::{advance_inverse, forward_map, Advance};
use todaflow_core::{DrivingFunction, Grid, LaurentMap, LoewnerFamily, C64};

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn complex(bound: f64) -> impl Strategy<Value = C64> {
    (-bound..bound, -bound..bound).prop_map(|(re, im)| C64::new(re, im))
}

/// Small perturbations of a disk, univalent by a wide margin.
fn near_disk() -> impl Strategy<Value = LaurentMap> {
    (0.8f64..2.0, complex(0.05), prop::collection::vec(complex(0.04), 1..4)).prop_map(|(r, a0, tail)| {
        let mut coeffs = vec![a0];
        coeffs.extend(tail.into_iter().map(|c| c * r));
        LaurentMap::new(r, coeffs).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fft_round_trip(log_n in 1u32..9, seed in prop::collection::vec(complex(10.0), 256)) {
        let n = 1usize << log_n;
        let original: Vec<C64> = seed[..n].to_vec();
        let mut data = original.clone();
        fourier::fft(&mut data);
        fourier::ifft(&mut data);
        for (a, b) in data.iter().zip(&original) {
            prop_assert!((a - b).norm() < 1e-12 * n as f64 * 10.0);
        }
        let back = fourier::synthesize(&fourier::modes(&original));
        for (a, b) in back.iter().zip(&original) {
            prop_assert!((a - b).norm() < 1e-11);
        }
    }

    #[test]
    fn fit_recovers_coefficients(map in near_disk()) {
        let grid = Grid::new(64).unwrap();
        let samples = map.boundary(grid).values;
        let fitted = LaurentMap::fit_circle(1.0, &samples, map.order()).unwrap();
        prop_assert!((fitted.r() - map.r()).abs() < 1e-12);
        for (a, b) in fitted.coeffs().iter().zip(map.coeffs()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn t0_step_adds_area_and_keeps_moments(map in near_disk(), dt in 0.005f64..0.05) {
        let res = Resolution::new(8, Grid::new(64).unwrap()).unwrap();
        let before = growth::moments(&map.padded(8), res.grid, 3).unwrap();
        let out = growth::step(&map, &FlowSpec::new(FlowKind::T0Infinity), &PotentialSpec::Quadratic, dt, res).unwrap();
        let after = growth::moments(&out.map, res.grid, 3).unwrap();
        prop_assert!((after.t0 - before.t0 - dt).abs() < 1e-6, "t0 {} -> {}", before.t0, after.t0);
        for (a, b) in after.t.iter().zip(&before.t) {
            prop_assert!((a - b).norm() < 1e-6);
        }
        prop_assert!((out.map.area() / std::f64::consts::PI - after.t0).abs() < 1e-9);
    }

    #[test]
    fn pchip_preserves_monotone_data(steps in prop::collection::vec(0.0f64..2.0, 3..12)) {
        let grid: Vec<f64> = (0..steps.len()).map(|i| i as f64).collect();
        let values: Vec<f64> = steps.iter().scan(0.0, |acc, d| { *acc += d; Some(*acc) }).collect();
        let p = Profile::new(grid.clone(), values.clone()).unwrap();
        let last = grid[grid.len() - 1];
        let samples: Vec<f64> = linspace(0.0, last, 400).iter().map(|t| p.eval(*t)).collect();
        prop_assert!(samples.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        let (lo, hi) = (values[0], values[values.len() - 1]);
        prop_assert!(samples.iter().all(|v| *v >= lo - 1e-12 && *v <= hi + 1e-12));
    }

    #[test]
    fn characteristics_compose(a in -1.0f64..1.0, b in 0.0f64..0.5, s1 in 0.0f64..0.4, s2 in 0.0f64..0.4) {
        // q_0 = t_0 / 2 with speed a + b q keeps the solution linear, which the
        // interpolant reproduces exactly, so composing two solves is exact
        let speed = move |q: f64| a + b * q;
        let p = Profile::from_fn(linspace(-3.0, 3.0, 61), |t| 0.5 * t).unwrap();
        let once = solve_characteristics(&p, &speed, s1 + s2).unwrap();
        let twice = solve_characteristics(&solve_characteristics(&p, &speed, s1).unwrap(), &speed, s2).unwrap();
        for (x, y) in once.values().iter().zip(twice.values()) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn gas_energy_is_rotation_invariant(
        pts in prop::collection::vec(complex(1.5), 3..10),
        angle in 0.0f64..std::f64::consts::TAU,
    ) {
        let cfg = GasConfig::plane(pts.len(), 1.0, vec![], 0);
        let turn = C64::from_polar(1.0, angle);
        let rotated: Vec<C64> = pts.iter().map(|z| z * turn).collect();
        prop_assume!(pts.iter().enumerate().all(|(i, a)| pts[i + 1..].iter().all(|b| (a - b).norm() > 1e-3)));
        let e0 = GasState::from_positions(pts, &cfg).unwrap().energy;
        let e1 = GasState::from_positions(rotated, &cfg).unwrap().energy;
        prop_assert!((e0 - e1).abs() < 1e-9 * e0.abs().max(1.0));
    }

    #[test]
    fn forces_match_energy_gradient(pts in prop::collection::vec(complex(1.5), 3..7), t2 in complex(0.2)) {
        prop_assume!(pts.iter().enumerate().all(|(i, a)| pts[i + 1..].iter().all(|b| (a - b).norm() > 0.05)));
        let cfg = GasConfig::plane(pts.len(), 1.0, vec![C64::new(0.0, 0.0), t2], 0);
        let state = GasState::from_positions(pts.clone(), &cfg).unwrap();
        let f = dyson::forces(&state, &cfg).unwrap();
        let h = 1e-6;
        for j in 0..pts.len() {
            let shifted = |d: C64| {
                let mut p = pts.clone();
                p[j] += d;
                GasState::from_positions(p, &cfg).unwrap().energy
            };
            let dx = (shifted(C64::new(h, 0.0)) - shifted(C64::new(-h, 0.0))) / (2.0 * h);
            let dy = (shifted(C64::new(0.0, h)) - shifted(C64::new(0.0, -h))) / (2.0 * h);
            // force = -dE/dz̄ = -(dx + i dy)/2
            let expect = C64::new(-dx / 2.0, -dy / 2.0);
            prop_assert!((f[j] - expect).norm() < 1e-4 * expect.norm().max(1.0), "{} vs {}", f[j], expect);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn descent_never_raises_energy(n in 4usize..16, seed in 0u64..1000) {
        let mut cfg = GasConfig::plane(n, 1.0, vec![], seed);
        cfg.schedule.max_iterations = 400;
        let (_, trace) = dyson::minimize_traced(&cfg).unwrap();
        prop_assert!(trace.windows(2).all(|w| w[1].energy <= w[0].energy + 1e-12 * w[0].energy.abs()));
    }

    #[test]
    fn forward_map_inverts_the_flow(
        radius in 1.3f64..3.0,
        angle in 0.0f64..std::f64::consts::TAU,
        q in 0.05f64..0.5,
        slope in -1.0f64..1.0,
    ) {
        let driving = DrivingFunction::piecewise_linear(vec![(0.0, 0.2), (1.0, 0.2 + slope)]).unwrap();
        let family = LoewnerFamily::new(0.0, 1.0, driving.clone()).unwrap();
        let w = C64::from_polar(radius, angle);
        let z = forward_map(w, q, &family).unwrap();
        let back = advance_inverse(z / family.r0(), 0.0, q, &driving, 1e-3).unwrap();
        match back {
            Advance::Alive(v) => prop_assert!((v - w).norm() < 1e-6 * radius, "{} vs {}", v, w),
            Advance::Absorbed { q } => prop_assert!(false, "absorbed at {}", q),
        }
    }

    #[test]
    fn brownian_driving_is_seeded(seed in 0u64..10_000) {
        let a = DrivingFunction::brownian(2.0, seed, 1e-3, 0.0, 0.5).unwrap();
        let b = DrivingFunction::brownian(2.0, seed, 1e-3, 0.0, 0.5).unwrap();
        let c = DrivingFunction::brownian(2.0, seed + 1, 1e-3, 0.0, 0.5).unwrap();
        let qs = linspace(0.0, 0.5, 37);
        prop_assert!(qs.iter().all(|q| a.theta(*q) == b.theta(*q)));
        prop_assert!(qs.iter().any(|q| a.theta(*q) != c.theta(*q)));
    }
}
