//! Random instance generator.
//!
//! Coordinates are uniform on the unit square with node 0 as the depot for
//! the depot-based kinds.
//!
//! * CVRP: integer demands in 1..=9; capacity `min(50, max(max demand,
//!   ceil(total / 2)))`, which always forces at least two routes.
//! * PCTSP: prizes and penalties uniform in [0, 1]; `min_prize = n / 8`,
//!   clipped to the total prize.
//! * OP: prizes in {0.01, ..., 1.00}; `max_length` 2, 3 or 4 by size, raised
//!   if needed so the nearest customer is reachable.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::substream;
use crate::routing::{Kind, Metric, Problem, RoutingInstance};

pub fn generate_instance(kind: Kind, n: usize, seed: u64) -> Result<RoutingInstance> {
    if n < 3 {
        return Err(Error::Config(format!("generator needs n >= 3, got {n}")));
    }
    let mut rng = substream(seed, kind as u64, n as u64);
    let coords: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen(), rng.gen()]).collect();
    let name = format!("{kind}{n}-s{seed}");
    let problem = match kind {
        Kind::Tsp => Problem::Tsp,
        Kind::Cvrp => {
            let mut demands: Vec<f64> = (0..n).map(|_| rng.gen_range(1..=9) as f64).collect();
            demands[0] = 0.0;
            let total: f64 = demands.iter().sum();
            let max = demands.iter().copied().fold(0.0, f64::max);
            let capacity = max.max((total / 2.0).ceil()).min(50.0);
            Problem::Cvrp { demands, capacity }
        }
        Kind::Pctsp => {
            let mut prizes: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
            let mut penalties: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
            prizes[0] = 0.0;
            penalties[0] = 0.0;
            let total: f64 = prizes.iter().sum();
            let min_prize = (n as f64 / 8.0).min(total);
            Problem::Pctsp {
                prizes,
                penalties,
                min_prize,
            }
        }
        Kind::Op => {
            let mut prizes: Vec<f64> = (0..n).map(|_| rng.gen_range(1..=100) as f64 / 100.0).collect();
            prizes[0] = 0.0;
            let base = match n {
                0..=20 => 2.0,
                21..=50 => 3.0,
                _ => 4.0,
            };
            let d = |j: usize| (coords[0][0] - coords[j][0]).hypot(coords[0][1] - coords[j][1]);
            let nearest = (1..n).map(d).fold(f64::INFINITY, f64::min);
            Problem::Op {
                prizes,
                max_length: f64::max(base, 2.0 * nearest + 1e-9),
            }
        }
    };
    Ok(RoutingInstance::new(name, coords, Metric::Euclidean, 0, problem)?)
}
