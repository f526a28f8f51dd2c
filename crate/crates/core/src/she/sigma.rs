use crate::{Error, Result};

/// Which convergent case of `σ_ab` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaCase {
    /// `b < 0`: `σ_ab(t) ≤ ζ(1-b) t`
    Linear,
    /// `a < 0 ≤ b`: `σ_ab(t) ≤ C t^{-a/(b-a)}`
    Interpolated,
}

/// `σ_ab(t) = Σ_{k≥1} min(k^{a-1}, k^{b-1} t)` with a certified enclosure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaSum {
    pub a: f64,
    pub b: f64,
    pub t: f64,
    pub terms: usize,
    pub partial: f64,
    /// the tail `Σ_{k>terms}` lies in `[tail_lo, tail_hi]`
    pub tail_lo: f64,
    pub tail_hi: f64,
    pub case: SigmaCase,
    /// `C_{a,b}`; `None` for `b = 0`, where no finite constant exists
    pub constant: Option<f64>,
    /// right-hand side the enclosure is checked against
    pub bound: f64,
    /// the enclosure does not exceed the bound: `partial + tail_lo ≤ bound`
    /// up to rounding. Equality cases (e.g. `a ≥ 1, b < 0, t ≤ 1`, where
    /// `σ = ζ(1-b) t` exactly) land here.
    pub holds: bool,
    /// the whole enclosure lies below the bound
    pub strict: bool,
}

impl SigmaSum {
    /// Midpoint of the enclosure.
    pub fn value(&self) -> f64 {
        self.partial + 0.5 * (self.tail_lo + self.tail_hi)
    }

    pub fn upper(&self) -> f64 {
        self.partial + self.tail_hi
    }
}

/// Largest allowed width of the tail enclosure.
pub const TAIL_TOLERANCE: f64 = 1e-8;

fn validate(a: f64, b: f64, t: f64) -> Result<SigmaCase> {
    if !(t > 0.0) || !t.is_finite() || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidArgument(format!("σ_ab needs finite a, b and t > 0 (got {a}, {b}, {t})")));
    }
    if a >= 0.0 && b >= 0.0 {
        return Err(Error::DivergentSum { a, b });
    }
    Ok(if b < 0.0 { SigmaCase::Linear } else { SigmaCase::Interpolated })
}

/// Index beyond which a single power branch `c·k^{q-1}` is active.
fn tail_branch(a: f64, b: f64, t: f64) -> (f64, f64, f64) {
    if a == b {
        return (1.0, a, t.min(1.0));
    }
    let crossover = t.powf(1.0 / (a - b));
    if a < b {
        (crossover, a, 1.0)
    } else {
        (crossover, b, t)
    }
}

/// `Σ_{k>n} c k^{q-1}` for `q < 0`: the summand is convex and decreasing,
/// so the sum lies between `∫_{n+1}^∞` and the midpoint value `∫_{n+1/2}^∞`.
fn tail_bounds(q: f64, c: f64, n: f64) -> (f64, f64) {
    let lo = c * (n + 1.0).powf(q) / -q;
    let hi = c * (n + 0.5).powf(q) / -q;
    (lo, hi)
}

/// Smallest cutoff whose tail enclosure is narrower than [`TAIL_TOLERANCE`].
pub fn required_terms(a: f64, b: f64, t: f64) -> Result<usize> {
    validate(a, b, t)?;
    let (k_star, q, c) = tail_branch(a, b, t);
    let width = |n: f64| {
        let (lo, hi) = tail_bounds(q, c, n);
        hi - lo
    };
    let mut lo = k_star.ceil().max(1.0);
    if width(lo) <= TAIL_TOLERANCE {
        return Ok(lo as usize);
    }
    let mut hi = lo * 2.0;
    while width(hi) > TAIL_TOLERANCE {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::InvalidArgument(format!(
                "σ_ab tail for a = {a}, b = {b}, t = {t} needs more than 1e12 terms"
            )));
        }
    }
    while hi - lo > 1.0 {
        let mid = ((lo + hi) / 2.0).floor();
        if width(mid) <= TAIL_TOLERANCE {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi as usize)
}

/// Riemann zeta for real `s > 1` by Euler-Maclaurin summation.
pub fn zeta(s: f64) -> f64 {
    assert!(s > 1.0, "zeta needs s > 1");
    const N: usize = 20;
    // B_2j / (2j)!
    const B: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
    ];
    let n = N as f64;
    let mut sum: f64 = (1..N).map(|k| (k as f64).powf(-s)).sum();
    sum += n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    let mut rising = s; // s (s+1) ... (s+2j-2)
    let mut power = n.powf(-s - 1.0);
    for (j, bj) in B.iter().enumerate() {
        sum += bj * rising * power;
        let m = 2.0 * j as f64;
        rising *= (s + m + 1.0) * (s + m + 2.0);
        power /= n * n;
    }
    sum
}

/// Right-hand side of the bound for the given case.
fn sigma_bound(a: f64, b: f64, t: f64, case: SigmaCase) -> (Option<f64>, f64) {
    match case {
        SigmaCase::Linear => {
            let c = zeta(1.0 - b);
            (Some(c), c * t)
        }
        SigmaCase::Interpolated if b == 0.0 => {
            // σ grows like t·ln(1/t) here; use the integral comparison
            // f(1) + ∫_1^∞ f instead of a power law
            let bound = if t < 1.0 {
                t + t * (1.0 - t.ln()) / -a
            } else {
                1.0 + 1.0 / -a
            };
            (None, bound)
        }
        SigmaCase::Interpolated => {
            let c = if b <= 1.0 { 1.0 / b - 1.0 / a } else { 1.0 - 1.0 / a };
            (Some(c), c * t.powf(-a / (b - a)))
        }
    }
}

/// Sums the first `terms` terms exactly and encloses the rest.
pub fn sigma_ab(a: f64, b: f64, t: f64, terms: usize) -> Result<SigmaSum> {
    let case = validate(a, b, t)?;
    let (k_star, q, c) = tail_branch(a, b, t);
    if (terms as f64) < k_star.ceil() {
        return Err(Error::InvalidArgument(format!(
            "cutoff {terms} is below the branch crossover {k_star:.3e}"
        )));
    }
    let (tail_lo, tail_hi) = tail_bounds(q, c, terms as f64);
    if tail_hi - tail_lo > TAIL_TOLERANCE {
        return Err(Error::InvalidArgument(format!(
            "cutoff {terms} leaves a tail enclosure wider than {TAIL_TOLERANCE:e}"
        )));
    }
    // smallest terms first
    let partial: f64 = (1..=terms)
        .rev()
        .map(|k| {
            let k = k as f64;
            k.powf(a - 1.0).min(k.powf(b - 1.0) * t)
        })
        .sum();
    let (constant, bound) = sigma_bound(a, b, t, case);
    Ok(SigmaSum {
        a,
        b,
        t,
        terms,
        partial,
        tail_lo,
        tail_hi,
        case,
        constant,
        bound,
        holds: partial + tail_lo <= bound * (1.0 + 1e-12),
        strict: partial + tail_hi <= bound,
    })
}
