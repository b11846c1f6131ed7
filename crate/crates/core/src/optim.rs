//! Derivative-free one- and two-dimensional minimizers and a bisection root finder.
//!
//! Objectives return `+inf` for infeasible points; every routine treats that as
//! "worse than anything finite".

/// Outcome of a local refinement.
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Best objective after each iteration.
    pub history: Vec<f64>,
}

/// Evaluates `f` on `n` evenly spaced points of `[lo, hi]`; returns the grid and values.
pub fn grid_1d<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let grid: Vec<f64> = (0..n)
        .map(|i| {
            if n == 1 {
                lo
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect();
    let values = grid.iter().map(|&x| f(x)).collect();
    (grid, values)
}

/// Index of the smallest value; ties go to the earliest index. `None` if all are infinite/NaN.
pub fn argmin(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            continue;
        }
        match best {
            Some(b) if values[b] <= v => {}
            _ => best = Some(i),
        }
    }
    best
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search on `[a, b]`, seeded with a known point `(x0, f0)`.
///
/// The returned point is the best ever evaluated, so it is never worse than the seed.
pub fn golden_section<F: FnMut(f64) -> f64>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    seed: (f64, f64),
    tol: f64,
    max_iter: usize,
) -> Refinement {
    let (mut best_x, mut best_f) = seed;
    let mut evals = 0;
    let mut eval = |x: f64, best_x: &mut f64, best_f: &mut f64, evals: &mut usize| {
        let v = f(x);
        *evals += 1;
        if v < *best_f || (v == *best_f && x < *best_x) {
            *best_f = v;
            *best_x = x;
        }
        v
    };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c, &mut best_x, &mut best_f, &mut evals);
    let mut fd = eval(d, &mut best_x, &mut best_f, &mut evals);
    let mut history = Vec::new();
    let mut iterations = 0;
    while (b - a) > tol && iterations < max_iter {
        iterations += 1;
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c, &mut best_x, &mut best_f, &mut evals);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d, &mut best_x, &mut best_f, &mut evals);
        }
        history.push(best_f);
    }
    Refinement {
        x: vec![best_x],
        fx: best_f,
        iterations,
        evaluations: evals,
        converged: (b - a) <= tol,
        history,
    }
}

/// Nelder–Mead on two parameters with restarts from the incumbent.
///
/// Converged means the final simplex fits in a box of side `tol`.
pub fn nelder_mead_2d<F: FnMut([f64; 2]) -> f64>(
    mut f: F,
    start: [f64; 2],
    f_start: f64,
    step: [f64; 2],
    tol: f64,
    max_iter: usize,
) -> Refinement {
    const MAX_RESTARTS: usize = 5;
    let mut evaluations = 0;
    let mut iterations = 0;
    let mut history = Vec::new();
    let mut best = (start, f_start);
    let mut converged = false;

    for _ in 0..=MAX_RESTARTS {
        let before = best.1;
        let mut simplex: Vec<([f64; 2], f64)> = vec![best];
        for k in 0..2 {
            let mut v = best.0;
            v[k] += step[k];
            let fv = f(v);
            evaluations += 1;
            simplex.push((v, fv));
        }
        let mut iters_here = 0;
        converged = false;
        while iters_here < max_iter {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let size = (1..3)
                .flat_map(|i| (0..2).map(move |k| (i, k)))
                .map(|(i, k)| (simplex[i].0[k] - simplex[0].0[k]).abs())
                .fold(0.0, f64::max);
            if size <= tol {
                converged = true;
                break;
            }
            iters_here += 1;
            let centroid = [
                (simplex[0].0[0] + simplex[1].0[0]) / 2.0,
                (simplex[0].0[1] + simplex[1].0[1]) / 2.0,
            ];
            let worst = simplex[2];
            let along = |t: f64| {
                [
                    centroid[0] + t * (worst.0[0] - centroid[0]),
                    centroid[1] + t * (worst.0[1] - centroid[1]),
                ]
            };
            let xr = along(-1.0);
            let fr = f(xr);
            evaluations += 1;
            if fr < simplex[0].1 {
                let xe = along(-2.0);
                let fe = f(xe);
                evaluations += 1;
                simplex[2] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[1].1 {
                simplex[2] = (xr, fr);
            } else {
                let (xc, fc) = if fr < worst.1 {
                    let xc = along(-0.5);
                    (xc, f(xc))
                } else {
                    let xc = along(0.5);
                    (xc, f(xc))
                };
                evaluations += 1;
                if fc < worst.1.min(fr) {
                    simplex[2] = (xc, fc);
                } else {
                    let x0 = simplex[0].0;
                    for v in simplex.iter_mut().skip(1) {
                        let x = [
                            x0[0] + 0.5 * (v.0[0] - x0[0]),
                            x0[1] + 0.5 * (v.0[1] - x0[1]),
                        ];
                        *v = (x, f(x));
                        evaluations += 1;
                    }
                }
            }
            let incumbent = simplex
                .iter()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("3 vertices");
            if incumbent.1 < best.1 {
                best = *incumbent;
            }
            history.push(best.1);
        }
        iterations += iters_here;
        if best.1.is_nan() || best.1 >= before {
            break;
        }
    }
    Refinement {
        x: best.0.to_vec(),
        fx: best.1,
        iterations,
        evaluations,
        converged,
        history,
    }
}

/// Root of `g` in `[lo, hi]` by bisection; `g(lo)` and `g(hi)` must differ in sign.
pub fn bisect<F: FnMut(f64) -> f64>(
    mut g: F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iter: usize,
) -> Option<(f64, usize)> {
    let mut g_lo = g(lo);
    let g_hi = g(hi);
    if g_lo.is_nan() || g_hi.is_nan() {
        return None;
    }
    if g_lo == 0.0 {
        return Some((lo, 0));
    }
    if g_hi == 0.0 {
        return Some((hi, 0));
    }
    if g_lo.signum() == g_hi.signum() {
        return None;
    }
    let mut iters = 0;
    while hi - lo > tol && iters < max_iter {
        iters += 1;
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if gm.is_nan() {
            return None;
        }
        if gm == 0.0 {
            return Some((mid, iters));
        }
        if gm.signum() == g_lo.signum() {
            lo = mid;
            g_lo = gm;
        } else {
            hi = mid;
        }
    }
    Some((0.5 * (lo + hi), iters))
}
