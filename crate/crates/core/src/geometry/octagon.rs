//! The genus-two surface obtained from the regular hyperbolic octagon with
//! interior angles π/4, realized as a Fuchsian group acting on the Poincaré
//! disk.
//!
//! Side `s` of the octagon is the geodesic perpendicular to the ray at angle
//! `s π/4`, at hyperbolic distance `r_in` from the origin.  Opposite-ish sides
//! are paired as `0↔2, 1↔3, 4↔6, 5↔7`, which gives the classical relation
//! `[a1, b1⁻¹][a2, b2⁻¹] = 1`.

use std::collections::HashSet;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::mobius::{cosh_dist, Mobius};
use crate::error::{Error, Result};

/// Hyperbolic inradius of the regular octagon with angles π/4:
/// `cosh r_in = cot(π/8)`.
pub fn inradius() -> f64 {
    (1.0 / (PI / 8.0).tan()).acosh()
}

/// Hyperbolic circumradius: `cosh R = cot²(π/8)`.
pub fn circumradius() -> f64 {
    let c = 1.0 / (PI / 8.0).tan();
    (c * c).acosh()
}

fn side_map(i: usize, j: usize, r_in: f64) -> Mobius {
    let psi = |s: usize| s as f64 * PI / 4.0;
    Mobius::rotation(psi(i))
        .compose(&Mobius::translation(2.0 * r_in))
        .compose(&Mobius::rotation(PI - psi(j)))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Octagon {
    /// Generators `g1..g8 = a1, b1, a2, b2, a1⁻¹, b1⁻¹, a2⁻¹, b2⁻¹` as disk
    /// automorphisms.
    pub generators: Vec<Mobius>,
    /// The same generators as real 2×2 matrices `[a, b, c, d]` acting on the
    /// upper half plane.
    pub sl2r: Vec<[f64; 4]>,
    /// `side_elements[s]` maps the octagon onto its neighbour across side `s`.
    pub side_elements: Vec<Mobius>,
    pub r_in: f64,
    pub r_circ: f64,
}

/// Reduced result of mapping a disk point into the fundamental octagon.
#[derive(Clone, Copy, Debug)]
pub struct Reduction {
    pub point: C64,
    /// Group element `h` with `h(input) = point`.
    pub element: Mobius,
    pub steps: usize,
}

pub fn build_octagon() -> Octagon {
    let r_in = inradius();
    let a1 = side_map(0, 2, r_in);
    let b1 = side_map(1, 3, r_in);
    let a2 = side_map(4, 6, r_in);
    let b2 = side_map(5, 7, r_in);
    let generators = vec![a1, b1, a2, b2, a1.inverse(), b1.inverse(), a2.inverse(), b2.inverse()];
    let side_elements = vec![
        a1,
        b1,
        a1.inverse(),
        b1.inverse(),
        a2,
        b2,
        a2.inverse(),
        b2.inverse(),
    ];
    let sl2r = generators.iter().map(|g| g.to_sl2r()).collect();
    Octagon { generators, sl2r, side_elements, r_in, r_circ: circumradius() }
}

impl Octagon {
    /// Product of the words of generator indices (0-based into `generators`).
    pub fn word_element(&self, word: &[usize]) -> Mobius {
        word.iter().fold(Mobius::identity(), |acc, &i| acc.compose(&self.generators[i]))
    }

    /// `[a1, b1⁻¹][a2, b2⁻¹]` with `[x, y] = x y x⁻¹ y⁻¹`.
    pub fn relator(&self) -> Mobius {
        let g = &self.generators;
        let comm = |x: &Mobius, y: &Mobius| x.compose(y).compose(&x.inverse()).compose(&y.inverse());
        comm(&g[0], &g[5]).compose(&comm(&g[2], &g[7]))
    }

    /// Whether `z` lies in the closed Dirichlet octagon centred at 0.
    pub fn contains(&self, z: C64, slack: f64) -> bool {
        if z.norm_sqr() >= 1.0 {
            return false;
        }
        let d0 = cosh_dist(z, C64::new(0.0, 0.0));
        self.side_elements.iter().all(|g| cosh_dist(z, g.apply(C64::new(0.0, 0.0))) >= d0 - slack)
    }

    /// Euclidean radius in the disk of the point of side `s` in direction `phi`
    /// when `phi` is within π/8 of the side normal.
    pub fn boundary_radius(&self, phi: f64) -> f64 {
        let sector = (phi / (PI / 4.0)).round();
        let dphi = phi - sector * PI / 4.0;
        // right triangle: tanh(rho) cos(dphi) = tanh(r_in)
        let th = self.r_in.tanh() / dphi.cos();
        let rho = th.atanh();
        (rho / 2.0).tanh()
    }

    /// Maps `z` into the fundamental octagon by repeatedly undoing the side
    /// pairing whose neighbouring centre is closest.
    pub fn reduce(&self, z: C64) -> Result<Reduction> {
        if z.norm() >= 1.0 - 1e-12 {
            return Err(Error::Domain(format!("point {z} is within 1e-12 of the boundary circle")));
        }
        let origin = C64::new(0.0, 0.0);
        let mut p = z;
        let mut acc = Mobius::identity();
        for step in 0..=200 {
            let d0 = cosh_dist(p, origin);
            let mut best: Option<(usize, f64)> = None;
            for (s, g) in self.side_elements.iter().enumerate() {
                let ds = cosh_dist(p, g.apply(origin));
                if ds < d0 * (1.0 - 1e-13) && best.is_none_or(|(_, b)| ds < b) {
                    best = Some((s, ds));
                }
            }
            match best {
                None => return Ok(Reduction { point: p, element: acc, steps: step }),
                Some((s, _)) => {
                    let ginv = self.side_elements[s].inverse();
                    p = ginv.apply(p);
                    acc = ginv.compose(&acc);
                }
            }
        }
        Err(Error::Evaluation(format!("reduction of {z} did not terminate within 200 steps")))
    }

    /// Group elements `g` with `d(0, g·0) ≤ radius`, found by breadth-first
    /// search over the generators.  The identity comes first.
    pub fn elements_within(&self, radius: f64) -> Vec<Mobius> {
        let origin = C64::new(0.0, 0.0);
        // tiles met by the segment [0, g·0] have centres within r_circ of it
        let limit = (radius + 2.0 * self.r_circ).cosh();
        let key = |g: &Mobius| {
            let p = g.apply(origin);
            ((p.re * 1e9).round() as i64, (p.im * 1e9).round() as i64)
        };
        let mut seen = HashSet::new();
        let mut out = vec![Mobius::identity()];
        seen.insert(key(&out[0]));
        let mut frontier = out.clone();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for g in &frontier {
                for s in &self.side_elements {
                    let h = g.compose(s);
                    let p = h.apply(origin);
                    if cosh_dist(p, origin) > limit * (1.0 + 1e-12) {
                        continue;
                    }
                    if seen.insert(key(&h)) {
                        next.push(h);
                    }
                }
            }
            out.extend(next.iter().copied());
            frontier = next;
        }
        let keep = radius.cosh() * (1.0 + 1e-12);
        out.retain(|g| cosh_dist(g.apply(origin), origin) <= keep);
        out
    }

    /// Hyperbolic area of the fundamental octagon by polar quadrature.
    pub fn area(&self) -> f64 {
        // area = ∫ 2ρ²/(1-ρ²) dφ with ρ(φ) the Euclidean boundary radius;
        // Gauss-Legendre on each of the 16 smooth half-sectors.
        let (nodes, weights) = gauss_legendre(32);
        let mut total = 0.0;
        for h in 0..16 {
            let a = -PI / 8.0 + h as f64 * PI / 8.0;
            let b = a + PI / 8.0;
            for (x, w) in nodes.iter().zip(&weights) {
                let phi = 0.5 * (a + b) + 0.5 * (b - a) * x;
                let rho = self.boundary_radius(phi);
                total += 0.5 * (b - a) * w * 2.0 * rho * rho / (1.0 - rho * rho);
            }
        }
        total
    }
}

/// Moves `(z, θ)` a hyperbolic distance `s` along its geodesic in the unit
/// disk (curvature −1), returning the new point and direction angle.
pub fn disk_geodesic_step(z: C64, theta: f64, s: f64) -> (C64, f64) {
    let w = C64::from_polar((s / 2.0).tanh(), theta);
    let m = Mobius::moving_origin_to(z);
    (m.apply(w), theta + m.arg_deriv(w))
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` via Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                let (mut q0, mut q1) = (1.0, z);
                for k in 2..=n {
                    let q2 = ((2 * k - 1) as f64 * z * q1 - (k - 1) as f64 * q0) / k as f64;
                    q0 = q1;
                    q1 = q2;
                }
                let dq = n as f64 * (z * q1 - q0) / (z * z - 1.0);
                w[i] = 2.0 / ((1.0 - z * z) * dq * dq);
                break;
            }
        }
        x[i] = z;
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radii_match_closed_forms() {
        let oct = build_octagon();
        assert!((oct.r_in - 1.528_570_919).abs() < 1e-8);
        assert!(((oct.r_in / 2.0).tanh() - 0.643_594_252_9).abs() < 1e-8);
        let vertex = oct.boundary_radius(PI / 8.0);
        assert!((vertex - (oct.r_circ / 2.0).tanh()).abs() < 1e-12);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn neighbour_centres_are_at_twice_the_inradius() {
        let oct = build_octagon();
        for (s, g) in oct.side_elements.iter().enumerate() {
            let p = g.apply(C64::new(0.0, 0.0));
            let d = super::super::mobius::hyp_dist(p, C64::new(0.0, 0.0));
            assert!((d - 2.0 * oct.r_in).abs() < 1e-10);
            assert!((p.arg() - s as f64 * PI / 4.0).sin().abs() < 1e-10);
        }
    }
}
