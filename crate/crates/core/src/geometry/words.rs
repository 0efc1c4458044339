//! Closed geodesics of the octagon surface indexed by words in the generators.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::octagon::{disk_geodesic_step, Octagon};
use super::{angle_diff, ClosedGeodesic, GeodesicSource, Mobius, UnitTangent};
use crate::error::Result;

fn inverse_letter(i: usize) -> usize {
    (i + 4) % 8
}

/// Translation length `2 arccosh(|tr|/2)` of a hyperbolic element, `None` if
/// the element is elliptic or parabolic.
pub fn translation_length(g: &Mobius) -> Option<f64> {
    let t = g.trace().re.abs();
    if t > 2.0 + 1e-9 {
        Some(2.0 * (t / 2.0).acosh())
    } else {
        None
    }
}

/// A point on the axis of a hyperbolic element and the unit direction along
/// which the element translates.
fn axis_start(g: &Mobius) -> (C64, f64) {
    // fixed points solve c z² + (d - a) z - b = 0
    let (a, b, c, d) = (g.a, g.b, g.c, g.d);
    let disc = ((d - a) * (d - a) + 4.0 * b * c).sqrt();
    let r1 = ((a - d) + disc) / (2.0 * c);
    let r2 = ((a - d) - disc) / (2.0 * c);
    // the attracting fixed point has |g'| < 1
    let (attr, rep) = if g.deriv(r1).norm() < g.deriv(r2).norm() { (r1, r2) } else { (r2, r1) };
    let (xp, xm) = (attr / attr.norm(), rep / rep.norm());
    let sum = xp + xm;
    if sum.norm() < 1e-14 {
        return (C64::new(0.0, 0.0), xp.arg());
    }
    let mu = sum.arg();
    let sin_half = ((xp - xm).norm() / 2.0).min(1.0);
    let cos_half = (1.0 - sin_half * sin_half).max(0.0).sqrt();
    let p0 = C64::from_polar(cos_half / (1.0 + sin_half), mu);
    let m = Mobius::moving_origin_to(p0);
    let candidates = [mu + PI / 2.0, mu - PI / 2.0];
    let theta0 = candidates
        .into_iter()
        .min_by(|u, v| {
            let du = (m.apply(C64::from_polar(1.0, *u)) - xp).norm();
            let dv = (m.apply(C64::from_polar(1.0, *v)) - xp).norm();
            du.total_cmp(&dv)
        })
        .unwrap();
    (p0, theta0)
}

/// The closed geodesic along the axis of the word's group element, sampled at
/// `n_samples` points and reduced to the fundamental octagon; `None` when the
/// element is not hyperbolic.
pub fn closed_geodesic_from_word(oct: &Octagon, word: &[usize], n_samples: usize) -> Result<Option<ClosedGeodesic>> {
    assert!(!word.is_empty(), "word must be nonempty");
    let g = oct.word_element(word);
    let period = match translation_length(&g) {
        Some(t) => t,
        None => return Ok(None),
    };
    let (p0, theta0) = axis_start(&g);
    let r = oct.reduce(p0)?;
    let mut z = r.point;
    let mut theta = theta0 + r.element.arg_deriv(p0);
    let n = n_samples.max(8);
    let dt = period / n as f64;
    let mut orbit = Vec::with_capacity(n);
    for _ in 0..n {
        orbit.push(UnitTangent::new(z.re, z.im, theta));
        let (z1, th1) = disk_geodesic_step(z, theta, dt);
        let red = oct.reduce(z1)?;
        theta = th1 + red.element.arg_deriv(z1);
        z = red.point;
    }
    let start = orbit[0];
    let closure_error = ((z - start.z()).norm_sqr() + angle_diff(theta, start.theta).powi(2)).sqrt();
    Ok(Some(ClosedGeodesic {
        orbit,
        period,
        source: GeodesicSource::OctagonWord { word: word.to_vec() },
        closure_error,
    }))
}

/// A pool member: a cyclically reduced word and its geodesic length.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PoolEntry {
    pub word: Vec<usize>,
    pub length: f64,
    pub trace: f64,
}

/// Cyclically reduced words of length at most `max_len`, one per distinct
/// `|trace|` (hence one per geodesic length), sorted by length.
pub fn word_pool(oct: &Octagon, max_len: usize) -> Vec<PoolEntry> {
    let mut best: HashMap<i64, PoolEntry> = HashMap::new();
    let mut stack: Vec<(Vec<usize>, Mobius)> = (0..8).map(|i| (vec![i], oct.generators[i])).collect();
    while let Some((w, g)) = stack.pop() {
        let cyclic_ok = w.len() == 1 || w[0] != inverse_letter(*w.last().unwrap());
        if cyclic_ok {
            if let Some(length) = translation_length(&g) {
                let tr = g.trace().re.abs();
                let key = (tr * 1e8).round() as i64;
                let entry = best.entry(key).or_insert_with(|| PoolEntry { word: w.clone(), length, trace: tr });
                if w.len() < entry.word.len() || (w.len() == entry.word.len() && w < entry.word) {
                    *entry = PoolEntry { word: w.clone(), length, trace: tr };
                }
            }
        }
        if w.len() < max_len {
            let last = *w.last().unwrap();
            for i in 0..8 {
                if i != inverse_letter(last) {
                    let mut w2 = w.clone();
                    w2.push(i);
                    stack.push((w2, g.compose(&oct.generators[i])));
                }
            }
        }
    }
    let mut out: Vec<PoolEntry> = best.into_values().collect();
    out.sort_by(|a, b| a.length.total_cmp(&b.length).then_with(|| a.word.cmp(&b.word)));
    out
}
