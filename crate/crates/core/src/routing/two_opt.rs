use super::{Problem, RoutingInstance, Solution};

// Minimum gain for a move to count, so float noise cannot cycle.
const MIN_GAIN: f64 = 1e-10;

/// First-improvement 2-opt on a node path with fixed endpoints.
fn improve_path(inst: &RoutingInstance, path: &mut [usize]) {
    let len = path.len();
    if len < 4 {
        return;
    }
    'restart: loop {
        for i in 0..len - 3 {
            let (a, b) = (path[i], path[i + 1]);
            for j in (i + 2)..len - 1 {
                let (c, d) = (path[j], path[j + 1]);
                let delta = inst.dist(a, c) + inst.dist(b, d) - inst.dist(a, b) - inst.dist(c, d);
                if delta < -MIN_GAIN {
                    path[i + 1..=j].reverse();
                    continue 'restart;
                }
            }
        }
        return;
    }
}

/// 2-opt until no improving exchange remains.
///
/// TSP tours are improved as a cycle (the start node stays first). For the
/// depot-based kinds each route is improved on its own; the OP objective does
/// not depend on route length, so OP solutions are returned unchanged.
pub fn two_opt(inst: &RoutingInstance, solution: &Solution) -> Solution {
    let mut routes = solution.routes.clone();
    match inst.problem() {
        Problem::Op { .. } => return solution.clone(),
        Problem::Tsp => {
            for r in &mut routes {
                // Closing the cycle turns it into a path with fixed endpoints.
                let mut path = r.clone();
                if let Some(&s) = r.first() {
                    path.push(s);
                }
                improve_path(inst, &mut path);
                path.pop();
                *r = path;
            }
        }
        Problem::Cvrp { .. } | Problem::Pctsp { .. } => {
            let depot = inst.depot();
            for r in &mut routes {
                let mut path = Vec::with_capacity(r.len() + 2);
                path.push(depot);
                path.extend_from_slice(r);
                path.push(depot);
                improve_path(inst, &mut path);
                *r = path[1..path.len() - 1].to_vec();
            }
        }
    }
    Solution::from_routes(inst, routes).expect("2-opt preserves feasibility")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::routing::{cycle_tokens, decode};

    fn square() -> RoutingInstance {
        RoutingInstance::tsp("sq", vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap()
    }

    #[test]
    fn optimal_square_unchanged() {
        let inst = square();
        let sol = decode(&inst, &cycle_tokens(4, &[0, 1, 2, 3])).unwrap();
        assert_eq!(two_opt(&inst, &sol), sol);
    }

    #[test]
    fn crossing_square_uncrosses() {
        let inst = square();
        let sol = decode(&inst, &cycle_tokens(4, &[0, 2, 1, 3])).unwrap();
        assert_eq!(sol.objective, -(2.0 + 2.0 * 2f64.sqrt()));
        let better = two_opt(&inst, &sol);
        assert_eq!(better.objective, -4.0);
        assert_eq!(better.routes[0][0], 0);
    }
}
