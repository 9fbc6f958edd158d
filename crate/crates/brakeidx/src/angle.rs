//! Points of the unit circle stored as exact rational fractions of a full turn.

use nalgebra::Complex;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

/// `e^{2πi p/q}` with `0 <= p < q` and `gcd(p, q) = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "(i64, i64)", from = "(i64, i64)")]
pub struct Omega {
    p: i64,
    q: i64,
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

impl Omega {
    pub const ONE: Omega = Omega { p: 0, q: 1 };
    pub const MINUS_ONE: Omega = Omega { p: 1, q: 2 };
    /// `√−1`
    pub const I: Omega = Omega { p: 1, q: 4 };

    pub fn from_turns(p: i64, q: i64) -> Self {
        Self::reduce(p as i128, q as i128)
    }

    fn reduce(p: i128, q: i128) -> Self {
        assert!(q != 0, "zero denominator");
        let (p, q) = if q < 0 { (-p, -q) } else { (p, q) };
        let p = p.rem_euclid(q);
        let g = gcd(p, q).max(1);
        Omega { p: (p / g) as i64, q: (q / g) as i64 }
    }

    /// `e^{iπ/k}`
    pub fn pi_over(k: i64) -> Self {
        Self::from_turns(1, 2 * k)
    }

    /// Nearest rational point with denominator `den` to the given angle.
    pub fn approx_radians(theta: f64, den: i64) -> Self {
        let p = (theta / (2.0 * PI) * den as f64).round() as i64;
        Self::from_turns(p, den)
    }

    pub fn turns(&self) -> (i64, i64) {
        (self.p, self.q)
    }

    /// Angle in `[0, 2π)`.
    pub fn angle(&self) -> f64 {
        2.0 * PI * self.p as f64 / self.q as f64
    }

    pub fn to_complex(&self) -> Complex<f64> {
        // quarter turns are exact
        if (4 * self.p) % self.q == 0 {
            return match 4 * self.p / self.q {
                0 => Complex::new(1.0, 0.0),
                1 => Complex::new(0.0, 1.0),
                2 => Complex::new(-1.0, 0.0),
                _ => Complex::new(0.0, -1.0),
            };
        }
        let (mut p, q) = (self.p, self.q);
        if 2 * p > q {
            p -= q;
        }
        let (s, c) = (2.0 * PI * p as f64 / q as f64).sin_cos();
        Complex::new(c, s)
    }

    pub fn is_one(&self) -> bool {
        self.p == 0
    }

    pub fn is_real(&self) -> bool {
        self.q <= 2
    }

    pub fn conj(&self) -> Self {
        Self::from_turns(-self.p, self.q)
    }

    pub fn mul(&self, other: &Omega) -> Self {
        let (p1, q1, p2, q2) = (self.p as i128, self.q as i128, other.p as i128, other.q as i128);
        Self::reduce(p1 * q2 + p2 * q1, q1 * q2)
    }

    pub fn pow(&self, k: i64) -> Self {
        Self::reduce(self.p as i128 * k as i128, self.q as i128)
    }

    /// All `ω` with `ω^m = self`, in increasing angle.
    pub fn roots(&self, m: u32) -> Vec<Omega> {
        let m = m as i64;
        let mut r: Vec<Omega> = (0..m)
            .map(|j| Self::from_turns(self.p + j * self.q, self.q * m))
            .collect();
        r.sort();
        r
    }
}

impl Ord for Omega {
    /// Order by angle in [0, 2π).
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.p as i128 * other.q as i128).cmp(&(other.p as i128 * self.q as i128))
    }
}

impl PartialOrd for Omega {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl From<(i64, i64)> for Omega {
    fn from((p, q): (i64, i64)) -> Self {
        Omega::from_turns(p, q)
    }
}

impl From<Omega> for (i64, i64) {
    fn from(w: Omega) -> Self {
        (w.p, w.q)
    }
}

impl fmt::Display for Omega {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.p, self.q) {
            (0, _) => write!(f, "1"),
            (1, 2) => write!(f, "-1"),
            _ => write!(f, "exp(2πi·{}/{})", self.p, self.q),
        }
    }
}
