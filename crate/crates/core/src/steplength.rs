//! Spectral step coefficients and their damping.

use crate::Vector;

/// Gradient norm below which an anchor iteration is treated as stationary.
pub const STATIONARY_TOL: f64 = 1e-14;

pub const DEFAULT_GAMMA_MIN: f64 = 1e-8;
pub const DEFAULT_GAMMA_MAX: f64 = 1e8;

/// Raw coefficient `c_k` before projection and damping.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coefficient {
    Value(f64),
    /// `sᵀy = 0` with `s ≠ 0`: no curvature measured; projects to `γ_max`.
    Unbounded,
    /// `s = 0`: the spectral ratio is `0/0`.
    Degenerate,
    /// `‖g‖` vanished at an anchor iteration.
    Stationary,
}

impl Coefficient {
    /// Scalar for logging; `Unbounded` is `+∞`, the others `NaN`.
    pub fn as_f64(self) -> f64 {
        match self {
            Coefficient::Value(c) => c,
            Coefficient::Unbounded => f64::INFINITY,
            Coefficient::Degenerate | Coefficient::Stationary => f64::NAN,
        }
    }
}

/// Barzilai-Borwein coefficient `‖s‖² / sᵀy`.
pub fn bb_coefficient(s: &Vector, y: &Vector) -> Coefficient {
    assert_eq!(s.len(), y.len());
    let ss = s.norm_squared();
    if ss == 0.0 {
        return Coefficient::Degenerate;
    }
    let sy = s.dot(y);
    if sy == 0.0 {
        Coefficient::Unbounded
    } else {
        Coefficient::Value(ss / sy)
    }
}

/// Anchor coefficient `1/‖g‖` used when a fresh sample is drawn.
pub fn anchor_coefficient(g: &Vector) -> Coefficient {
    let norm = g.norm();
    if norm <= STATIONARY_TOL {
        Coefficient::Stationary
    } else {
        Coefficient::Value(1.0 / norm)
    }
}

/// Previous iterate and batch gradient, needed for the spectral ratio.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SpectralState {
    prev: Option<(Vector, Vector)>,
}

impl SpectralState {
    pub fn new() -> Self {
        Self::default()
    }

    /// True once a finite `(x, g)` pair is stored.
    pub fn is_valid(&self) -> bool {
        self.prev.is_some()
    }

    /// BB coefficient from `s = x − x_prev`, `y = g − g_prev`;
    /// `Degenerate` when no valid memory exists.
    pub fn coefficient(&self, x: &Vector, g: &Vector) -> Coefficient {
        match &self.prev {
            Some((px, pg)) => bb_coefficient(&(x - px), &(g - pg)),
            None => Coefficient::Degenerate,
        }
    }

    /// Stores `(x, g)`; non-finite pairs invalidate the memory.
    pub fn remember(&mut self, x: &Vector, g: &Vector) {
        let finite = x.iter().chain(g.iter()).all(|v| v.is_finite());
        self.prev = finite.then(|| (x.clone(), g.clone()));
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DampingMode {
    /// Divide by `max(k,1)`.
    Standard,
    /// Divide by `max(k,1)^{1+δ}`.
    Modified,
    /// Projection only.
    Undamped,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DampingPolicy {
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub exponent: f64,
    pub mode: DampingMode,
}

impl DampingPolicy {
    pub fn standard(gamma_min: f64, gamma_max: f64) -> Self {
        DampingPolicy {
            gamma_min,
            gamma_max,
            exponent: 1.0,
            mode: DampingMode::Standard,
        }
    }

    pub fn modified(gamma_min: f64, gamma_max: f64, delta: f64) -> Self {
        DampingPolicy {
            gamma_min,
            gamma_max,
            exponent: 1.0 + delta,
            mode: DampingMode::Modified,
        }
    }

    pub fn undamped(gamma_min: f64, gamma_max: f64) -> Self {
        DampingPolicy {
            gamma_min,
            gamma_max,
            exponent: 1.0,
            mode: DampingMode::Undamped,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.gamma_min > 0.0
            && self.gamma_min <= 1.0
            && self.gamma_max >= 1.0
            && self.gamma_max.is_finite()
            && self.exponent >= 1.0
    }

    /// Divisor applied at iteration `k`.
    pub fn divisor(&self, k: usize) -> f64 {
        match self.mode {
            DampingMode::Undamped => 1.0,
            _ => (k.max(1) as f64).powf(self.exponent),
        }
    }

    /// Projects `c` onto `[γ_min, γ_max]`. `NaN` projects to `γ_min`.
    pub fn clip(&self, c: f64) -> f64 {
        if c.is_nan() {
            self.gamma_min
        } else {
            c.clamp(self.gamma_min, self.gamma_max)
        }
    }
}

/// `γ_k = clip(c) / max(k,1)^e` (no division when undamped).
pub fn damp(c: Coefficient, k: usize, policy: &DampingPolicy) -> f64 {
    let raw = match c {
        Coefficient::Value(v) => v,
        Coefficient::Unbounded => f64::INFINITY,
        // callers resolve these before damping; fall back to the lower bound
        Coefficient::Degenerate | Coefficient::Stationary => f64::NAN,
    };
    policy.clip(raw) / policy.divisor(k)
}
