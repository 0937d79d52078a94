//! Fixed-order Gauss–Legendre quadrature on frequency-aware panels.
//!
//! The integrands here are smooth but oscillate in ω with a known fastest
//! period, and may carry a power-law factor and the poles of `coth(ω/2T)`
//! close to the origin. The mesh is therefore a uniform grid whose width
//! resolves the oscillation, with the first panel replaced by a geometric
//! cascade towards `ω = 0` that ends in a power-mapped piece. Refinement
//! bisects every panel at once until two successive levels agree.

use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};
use crate::exec::{map_slice, tree_sum, Execution};

/// Gauss–Legendre order used on every panel.
pub const PANEL_ORDER: usize = 16;

/// Number of halvings in the geometric cascade towards `ω = 0`.
const GRADING_DEPTH: u32 = 40;

/// Integrand components: total, vacuum part and thermal part.
pub(crate) type Triple = [f64; 3];

fn rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        GaussLegendre::new(PANEL_ORDER)
            .expect("Gauss-Legendre order is a positive constant")
            .as_node_weight_pairs()
            .to_vec()
    })
}

#[derive(Clone, Copy, Debug)]
enum Panel {
    /// `[a, b]` integrated directly.
    Plain { a: f64, b: f64 },
    /// `[0, a]` integrated in `u` with `ω = a·u^power`, `u ∈ [u0, u1]`.
    Mapped { a: f64, power: f64, u0: f64, u1: f64 },
}

impl Panel {
    fn split(self, pieces: usize) -> impl Iterator<Item = Panel> {
        let k = pieces as f64;
        (0..pieces).map(move |i| {
            let (lo, hi) = (i as f64 / k, (i + 1) as f64 / k);
            match self {
                Panel::Plain { a, b } => Panel::Plain {
                    a: a + (b - a) * lo,
                    b: a + (b - a) * hi,
                },
                Panel::Mapped { a, power, u0, u1 } => Panel::Mapped {
                    a,
                    power,
                    u0: u0 + (u1 - u0) * lo,
                    u1: u0 + (u1 - u0) * hi,
                },
            }
        })
    }

    fn integrate<F: Fn(f64) -> Triple>(&self, f: &F) -> Triple {
        let mut acc = [0.0; 3];
        match *self {
            Panel::Plain { a, b } => {
                let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
                for &(x, w) in rule() {
                    let v = f(mid + half * x);
                    for c in 0..3 {
                        acc[c] += w * v[c];
                    }
                }
                acc.iter_mut().for_each(|v| *v *= half);
            }
            Panel::Mapped { a, power, u0, u1 } => {
                let (mid, half) = (0.5 * (u0 + u1), 0.5 * (u1 - u0));
                for &(x, w) in rule() {
                    let u = mid + half * x;
                    let jacobian = a * power * u.powf(power - 1.0);
                    let v = f(a * u.powf(power));
                    for c in 0..3 {
                        acc[c] += w * jacobian * v[c];
                    }
                }
                acc.iter_mut().for_each(|v| *v *= half);
            }
        }
        acc
    }
}

/// Panel layout over `[0, ω_max]`.
#[derive(Clone, Debug)]
pub(crate) struct Mesh {
    panels: Vec<Panel>,
    upper: f64,
}

impl Mesh {
    /// Builds the base mesh.
    ///
    /// `width` bounds the uniform panel width; `origin_exponent` is the power
    /// `p` of the integrand's leading behaviour `ω^p` at the origin, which
    /// sets the mapping used on the innermost piece.
    pub(crate) fn new(upper: f64, width: f64, origin_exponent: f64, max_panels: usize) -> Result<Self> {
        let count = (upper / width).ceil().max(8.0);
        if count > max_panels as f64 {
            return Err(Error::QuadratureNotConverged {
                partial: f64::NAN,
                error_estimate: f64::INFINITY,
                panels: count as usize,
            });
        }
        let count = count as usize;
        let h = upper / count as f64;
        let mut panels = Vec::with_capacity(count + GRADING_DEPTH as usize + 1);
        let innermost = h * 0.5f64.powi(GRADING_DEPTH as i32);
        let power = (2.0 / (origin_exponent + 1.0)).ceil().max(1.0);
        panels.push(Panel::Mapped {
            a: innermost,
            power,
            u0: 0.0,
            u1: 1.0,
        });
        for j in (0..GRADING_DEPTH).rev() {
            let b = h * 0.5f64.powi(j as i32);
            panels.push(Panel::Plain { a: 0.5 * b, b });
        }
        for i in 1..count {
            panels.push(Panel::Plain {
                a: h * i as f64,
                b: if i + 1 == count { upper } else { h * (i + 1) as f64 },
            });
        }
        Ok(Self { panels, upper })
    }

    pub(crate) fn upper(&self) -> f64 {
        self.upper
    }

    fn evaluate<F>(&self, level: u32, f: &F, exec: Execution) -> (Triple, f64)
    where
        F: Fn(f64) -> Triple + Sync + Send,
    {
        let pieces = 1usize << level;
        let per_panel: Vec<Triple> = map_slice(exec, &self.panels, |panel| {
            let mut acc = [0.0; 3];
            for sub in panel.split(pieces) {
                let v = sub.integrate(f);
                for c in 0..3 {
                    acc[c] += v[c];
                }
            }
            acc
        });
        let mut out = [0.0; 3];
        for (c, slot) in out.iter_mut().enumerate() {
            let column: Vec<f64> = per_panel.iter().map(|v| v[c]).collect();
            *slot = tree_sum(&column);
        }
        let magnitude: Vec<f64> = per_panel.iter().map(|v| v[0].abs()).collect();
        (out, tree_sum(&magnitude))
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Outcome {
    pub values: Triple,
    pub error: f64,
}

/// Integrates `f` over the mesh, bisecting all panels until successive
/// levels agree to `rtol` in every component.
pub(crate) fn integrate<F>(
    mesh: &Mesh,
    f: F,
    rtol: f64,
    max_panels: usize,
    exec: Execution,
) -> Result<Outcome>
where
    F: Fn(f64) -> Triple + Sync + Send,
{
    let (mut previous, _) = mesh.evaluate(0, &f, exec);
    let mut level = 1u32;
    loop {
        let panels = mesh.panels.len() << level;
        let (current, magnitude) = mesh.evaluate(level, &f, exec);
        let delta = (0..3)
            .map(|c| (current[c] - previous[c]).abs())
            .fold(0.0, f64::max);
        let rounding = 64.0 * f64::EPSILON * magnitude;
        let scale = current[0].abs();
        if delta <= rtol * scale || delta <= rounding {
            return Ok(Outcome {
                values: current,
                error: delta + rounding,
            });
        }
        if panels * 2 > max_panels {
            return Err(Error::QuadratureNotConverged {
                partial: current[0],
                error_estimate: delta,
                panels,
            });
        }
        previous = current;
        level += 1;
    }
}
