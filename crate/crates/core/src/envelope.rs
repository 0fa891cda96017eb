//! Lower convex envelope (greatest convex minorant) of points on integer
//! abscissae, evaluated exactly at rational arguments.

use crate::combinatorics::Rational;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvexEnvelope {
    points: Vec<(i64, Rational)>,
    vertices: Vec<(i64, Rational)>,
}

impl ConvexEnvelope {
    /// Builds the envelope of `points`. Abscissae must be strictly increasing.
    pub fn new(points: Vec<(i64, Rational)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Domain("envelope of an empty point set".into()));
        }
        if points.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::Domain("envelope abscissae must be strictly increasing".into()));
        }
        let mut hull: Vec<(i64, Rational)> = Vec::with_capacity(points.len());
        for p in &points {
            while hull.len() >= 2 {
                let (ax, ay) = &hull[hull.len() - 2];
                let (bx, by) = &hull[hull.len() - 1];
                // drop b when it lies on or above the chord a–p
                let lhs = (by - ay) * Rational::integer(p.0 - ax);
                let rhs = (&p.1 - ay) * Rational::integer(bx - ax);
                if lhs >= rhs {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p.clone());
        }
        Ok(ConvexEnvelope { points, vertices: hull })
    }

    /// The raw input points.
    pub fn points(&self) -> &[(i64, Rational)] {
        &self.points
    }

    /// Envelope vertices (collinear points removed).
    pub fn vertices(&self) -> &[(i64, Rational)] {
        &self.vertices
    }

    pub fn domain(&self) -> (i64, i64) {
        (self.points[0].0, self.points[self.points.len() - 1].0)
    }

    /// Vertex abscissae `(t1, t2)` of the segment containing `x`; equal when
    /// `x` is itself a vertex.
    pub fn segment(&self, x: &Rational) -> Result<(i64, i64)> {
        let (lo, hi) = self.domain();
        if *x < lo || *x > hi {
            return Err(Error::Domain(format!("{x} outside envelope domain [{lo}, {hi}]")));
        }
        let idx = self.vertices.partition_point(|(vx, _)| Rational::integer(*vx) < *x);
        let vx = self.vertices[idx].0;
        if Rational::integer(vx) == *x {
            Ok((vx, vx))
        } else {
            Ok((self.vertices[idx - 1].0, vx))
        }
    }

    /// Exact value of the envelope at `x`.
    pub fn evaluate(&self, x: &Rational) -> Result<Rational> {
        let (t1, t2) = self.segment(x)?;
        let y1 = self.vertex_value(t1);
        if t1 == t2 {
            return Ok(y1.clone());
        }
        let y2 = self.vertex_value(t2);
        let w = (x - Rational::integer(t1)) / Rational::integer(t2 - t1);
        Ok(y1 + &w * (y2 - y1))
    }

    fn vertex_value(&self, x: i64) -> &Rational {
        &self.vertices.iter().find(|(vx, _)| *vx == x).expect("vertex").1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    /// Independent oracle: in one dimension the greatest convex minorant at
    /// `x` is the minimum over chords of point pairs straddling `x`.
    fn chord_min(points: &[(i64, Rational)], x: &Rational) -> Rational {
        let mut best: Option<Rational> = None;
        for (i, (xi, yi)) in points.iter().enumerate() {
            for (xj, yj) in &points[i..] {
                let (xi_r, xj_r) = (Rational::integer(*xi), Rational::integer(*xj));
                if xi_r > *x || xj_r < *x {
                    continue;
                }
                let v = if xi == xj {
                    yi.clone()
                } else {
                    yi + (x - &xi_r) / (&xj_r - &xi_r) * (yj - yi)
                };
                best = Some(match best {
                    Some(b) if b <= v => b,
                    _ => v,
                });
            }
        }
        best.unwrap()
    }

    #[test]
    fn already_convex_points_are_kept() {
        let env = ConvexEnvelope::new(vec![(1, r(4, 3)), (2, r(7, 6)), (3, r(1, 1))]).unwrap();
        // collinear middle point is not a vertex but the value is preserved
        assert_eq!(env.vertices().len(), 2);
        assert_eq!(env.evaluate(&r(2, 1)).unwrap(), r(7, 6));
    }

    #[test]
    fn concave_bump_is_cut() {
        let env = ConvexEnvelope::new(vec![(1, r(2, 1)), (2, r(3, 1)), (3, r(0, 1))]).unwrap();
        assert_eq!(env.vertices().len(), 2);
        assert_eq!(env.evaluate(&r(2, 1)).unwrap(), r(1, 1));
        assert_eq!(env.segment(&r(2, 1)).unwrap(), (1, 3));
    }

    #[test]
    fn segments_at_vertices_and_between() {
        let env = ConvexEnvelope::new(vec![(1, r(5, 3)), (2, r(1, 1)), (3, r(1, 1))]).unwrap();
        assert_eq!(env.segment(&r(2, 1)).unwrap(), (2, 2));
        assert_eq!(env.segment(&r(3, 2)).unwrap(), (1, 2));
        assert_eq!(env.evaluate(&r(3, 2)).unwrap(), r(4, 3));
        assert!(env.evaluate(&r(7, 2)).is_err());
        assert!(env.evaluate(&r(1, 2)).is_err());
    }

    #[test]
    fn rejects_bad_abscissae() {
        assert!(ConvexEnvelope::new(vec![]).is_err());
        assert!(ConvexEnvelope::new(vec![(2, r(1, 1)), (1, r(1, 1))]).is_err());
    }

    #[test]
    fn matches_chord_oracle_on_pseudo_random_points() {
        let mut state = 0x1234_5678u64;
        for _ in 0..200 {
            let n = 1 + (state % 7) as i64;
            let points: Vec<_> = (1..=n)
                .map(|x| {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    (x, r(((state >> 33) % 41) as i64 - 20, 1 + ((state >> 20) % 5) as i64))
                })
                .collect();
            let env = ConvexEnvelope::new(points.clone()).unwrap();
            for q in 0..=(4 * (n - 1)) {
                let x = r(4 + q, 4);
                assert_eq!(env.evaluate(&x).unwrap(), chord_min(&points, &x), "{points:?} at {x}");
            }
            for (x, y) in &points {
                assert!(env.evaluate(&Rational::integer(*x)).unwrap() <= *y);
            }
        }
    }
}
