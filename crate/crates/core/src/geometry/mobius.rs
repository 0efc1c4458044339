//! Möbius transformations of the Poincaré disk and helpers for hyperbolic
//! distance.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// The transformation `z ↦ (a z + b)/(c z + d)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mobius {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl Mobius {
    pub fn identity() -> Self {
        Mobius {
            a: C64::new(1.0, 0.0),
            b: C64::new(0.0, 0.0),
            c: C64::new(0.0, 0.0),
            d: C64::new(1.0, 0.0),
        }
    }

    /// Rotation of the disk by angle `phi`, normalized to determinant one.
    pub fn rotation(phi: f64) -> Self {
        Mobius {
            a: C64::from_polar(1.0, phi / 2.0),
            b: C64::new(0.0, 0.0),
            c: C64::new(0.0, 0.0),
            d: C64::from_polar(1.0, -phi / 2.0),
        }
    }

    /// Hyperbolic translation by distance `dist` along the real diameter.
    pub fn translation(dist: f64) -> Self {
        let (ch, sh) = ((dist / 2.0).cosh(), (dist / 2.0).sinh());
        Mobius {
            a: C64::new(ch, 0.0),
            b: C64::new(sh, 0.0),
            c: C64::new(sh, 0.0),
            d: C64::new(ch, 0.0),
        }
    }

    /// The disk automorphism `w ↦ (w + p)/(1 + p̄ w)` sending 0 to `p` with a
    /// positive real derivative at 0.
    pub fn moving_origin_to(p: C64) -> Self {
        let s = 1.0 / (1.0 - p.norm_sqr()).sqrt();
        Mobius {
            a: C64::new(s, 0.0),
            b: p * s,
            c: p.conj() * s,
            d: C64::new(s, 0.0),
        }
    }

    pub fn apply(&self, z: C64) -> C64 {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    pub fn det(&self) -> C64 {
        self.a * self.d - self.b * self.c
    }

    pub fn deriv(&self, z: C64) -> C64 {
        let q = self.c * z + self.d;
        self.det() / (q * q)
    }

    /// Argument of the derivative; the rotation applied to tangent directions.
    pub fn arg_deriv(&self, z: C64) -> f64 {
        self.deriv(z).arg()
    }

    pub fn compose(&self, o: &Mobius) -> Mobius {
        Mobius {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn inverse(&self) -> Mobius {
        let det = self.det();
        Mobius { a: self.d / det, b: -self.b / det, c: -self.c / det, d: self.a / det }
    }

    pub fn trace(&self) -> C64 {
        self.a + self.d
    }

    /// Largest entrywise distance to `±other` (projective comparison).
    pub fn dist_projective(&self, o: &Mobius) -> f64 {
        let plus = (self.a - o.a).norm().max((self.b - o.b).norm()).max((self.c - o.c).norm()).max((self.d - o.d).norm());
        let minus = (self.a + o.a).norm().max((self.b + o.b).norm()).max((self.c + o.c).norm()).max((self.d + o.d).norm());
        plus.min(minus)
    }

    /// Conjugate by the Cayley transform `z ↦ i(1+z)/(1-z)` to obtain the
    /// corresponding real matrix acting on the upper half plane, `[a, b, c, d]`.
    pub fn to_sl2r(&self) -> [f64; 4] {
        // C = [[i, i], [-1, 1]], C^{-1} = 1/(2i) [[1, -i], [1, i]]
        let i = C64::new(0.0, 1.0);
        let cay = Mobius { a: i, b: i, c: C64::new(-1.0, 0.0), d: C64::new(1.0, 0.0) };
        let m = cay.compose(self).compose(&cay.inverse());
        let s = m.det().sqrt();
        let (a, b, c, d) = (m.a / s, m.b / s, m.c / s, m.d / s);
        // choose the overall sign making the matrix real
        let phase = if a.norm() > d.norm() { a } else { d };
        let sign = if phase.re >= 0.0 { 1.0 } else { -1.0 };
        [sign * a.re, sign * b.re, sign * c.re, sign * d.re]
    }
}

/// `cosh` of the hyperbolic distance between two disk points (curvature -1,
/// metric `4|dz|²/(1-|z|²)²`).
pub fn cosh_dist(z: C64, w: C64) -> f64 {
    1.0 + 2.0 * (z - w).norm_sqr() / ((1.0 - z.norm_sqr()) * (1.0 - w.norm_sqr()))
}

pub fn hyp_dist(z: C64, w: C64) -> f64 {
    cosh_dist(z, w).max(1.0).acosh()
}
