use fracheat::spde::*;
use fracheat::stats::*;
use fracheat::Alpha;

struct Case {
    alpha: f64,
    direction: Direction,
    grid: SolverGrid,
    lags: (usize, usize),
}

fn case(alpha: f64, direction: Direction, preset: Preset) -> Case {
    let a = Alpha::new(alpha).unwrap();
    let stepped = !matches!(preset, Preset::Additive);
    let (grid, lags) = match (direction, alpha == 2.0) {
        (Direction::Time, false) => (SolverGrid::new(a, 1.0, 2.0, 1024, 2048).unwrap(), (4, 400)),
        (Direction::Time, true) => (SolverGrid::new(a, 1.0, 2.0, 1024, 1024).unwrap(), (4, 400)),
        (Direction::Space, false) => (
            SolverGrid::new(a, 1.0, 2.0, if stepped { 64 } else { 4 }, 8192).unwrap(),
            (8, 800),
        ),
        (Direction::Space, true) => (
            SolverGrid::new(a, 1.0, 2.0, if stepped { 64 } else { 4 }, 8192).unwrap(),
            (4, 400),
        ),
    };
    Case {
        alpha,
        direction,
        grid,
        lags,
    }
}

fn fit(c: &Case, preset: Preset, seeds: &[u64]) -> HolderFit {
    let model = ModelSpec::new(1, preset).with_scheme(Scheme::ExactConvolution);
    let plan = LagPlan::geometric(c.direction, &c.grid, c.lags.0, c.lags.1, 9).unwrap();
    let rows = batch_map(&model, &c.grid, seeds, |s| lag_moments(s, &plan, 2.0)).unwrap();
    holder_fit(&rows, &plan, &c.grid, 2.0).unwrap()
}

#[test]
fn holder_slopes_match_parabolic_metric() {
    // time-direction fits average over many base times and need fewer paths
    let seeds = |d: Direction| -> Vec<u64> { (0..if d == Direction::Time { 24 } else { 64 }).collect() };
    for preset in [Preset::Additive, Preset::BoundedSmooth] {
        for alpha in [1.5, 2.0] {
            for direction in [Direction::Time, Direction::Space] {
                let c = case(alpha, direction, preset);
                let f = fit(&c, preset, &seeds(direction));
                let expected = expected_slope(Alpha::new(c.alpha).unwrap(), direction, 2.0);
                println!(
                    "{:?} alpha {alpha} {direction:?}: slope {:.4} (expected {expected:.4}, se {:.4}, r2 {:.5})",
                    preset, f.slope, f.stderr, f.r2
                );
                assert!((f.slope - expected).abs() <= 0.05);
            }
        }
    }
}

#[test]
fn white_noise_has_no_spatial_regularity() {
    // unsolved noise: the increment moment does not depend on the lag
    let g = SolverGrid::new(Alpha::new(1.5).unwrap(), 1.0, 4.0, 4, 4096).unwrap();
    let plan = LagPlan::geometric(Direction::Space, &g, 4, 800, 9).unwrap();
    let rows: Vec<Vec<f64>> = (0..24u64)
        .map(|seed| {
            let noise = generate_noise(&g, 1, seed).unwrap();
            let mut values = vec![0.0; (g.nt + 1) * g.nx];
            values[g.nt * g.nx..].copy_from_slice(&noise.increments[(g.nt - 1) * g.nx..]);
            let s = FieldSample {
                grid: g,
                d: 1,
                preset: "white-noise".into(),
                seed,
                values,
            };
            lag_moments(&s, &plan, 2.0)
        })
        .collect();
    let f = holder_fit(&rows, &plan, &g, 2.0).unwrap();
    assert!(f.slope.abs() < 0.05, "slope {}", f.slope);
}
