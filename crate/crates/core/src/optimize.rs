//! Coordinate pattern search (compass search) for maximizing a black-box
//! objective.
//!
//! One iteration polls a single coordinate: `x + h e_k`, then `x - h e_k`,
//! keeping the first improvement. After a full sweep over all coordinates
//! without improvement the step `h` shrinks; the search stops once `h` drops
//! below `min_step`, the iteration cap is hit, or the target is reached.

#[derive(Debug, Clone)]
pub struct PatternSearch {
    pub initial_step: f64,
    pub shrink: f64,
    pub min_step: f64,
    pub max_iters: usize,
    /// Stop as soon as the best value reaches this level.
    pub target: Option<f64>,
}

impl Default for PatternSearch {
    fn default() -> Self {
        Self { initial_step: 0.3, shrink: 0.5, min_step: 1e-4, max_iters: 500, target: None }
    }
}

#[derive(Debug, Clone)]
pub struct PatternResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// Best value after each iteration (non-decreasing).
    pub history: Vec<f64>,
}

impl PatternSearch {
    pub fn maximize(&self, mut f: impl FnMut(&[f64]) -> f64, x0: Vec<f64>) -> PatternResult {
        let mut x = x0;
        let mut best = f(&x);
        let mut evaluations = 1;
        let mut history = Vec::new();
        let n = x.len();
        let reached = |v: f64| self.target.is_some_and(|t| v >= t);

        if n == 0 || reached(best) {
            return PatternResult { x, value: best, iterations: 0, evaluations, history };
        }

        let mut step = self.initial_step;
        let mut improved_this_sweep = false;
        let mut iterations = 0;
        let mut k = 0;
        while iterations < self.max_iters {
            iterations += 1;
            let original = x[k];
            for delta in [step, -step] {
                x[k] = original + delta;
                let v = f(&x);
                evaluations += 1;
                if v > best {
                    best = v;
                    improved_this_sweep = true;
                    break;
                }
                x[k] = original;
            }
            history.push(best);
            if reached(best) {
                break;
            }
            k += 1;
            if k == n {
                k = 0;
                if !improved_this_sweep {
                    step *= self.shrink;
                    if step < self.min_step {
                        break;
                    }
                }
                improved_this_sweep = false;
            }
        }
        PatternResult { x, value: best, iterations, evaluations, history }
    }
}

/// Minimizes a unimodal function on `[lo, hi]` by golden-section search.
/// Returns the abscissa of the best point seen.
pub fn golden_section_min(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, iters: usize) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        if (b - a).abs() <= 1e-15 * (a.abs() + b.abs()).max(1e-300) {
            break;
        }
    }
    if fc <= fd {
        c
    } else {
        d
    }
}
