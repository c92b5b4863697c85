use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::grid::{Axis, Domain, Grid2D};
use super::gridfn::GridFn2D;
use crate::error::{Error, Result};

type Fn1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type Fn2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Integrability class carried by a coefficient field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoothnessTag {
    /// `L_p(G)`.
    Lp,
    /// Essentially bounded in x, p-integrable in y.
    LinfXLpY,
    /// p-integrable in x, essentially bounded in y.
    LpXLinfY,
    /// Bounded on `G` (finitely many bounded pieces).
    Bounded,
    Continuous,
}

impl SmoothnessTag {
    /// Whether a field of this class also belongs to `required`.
    pub fn implies(self, required: SmoothnessTag) -> bool {
        use SmoothnessTag::*;
        match (self, required) {
            (a, b) if a == b => true,
            (Continuous, _) => true,
            (Bounded, Continuous) => false,
            (Bounded, _) => true,
            (LinfXLpY | LpXLinfY, Lp) => true,
            _ => false,
        }
    }
}

#[derive(Clone)]
enum Repr1D {
    Constant(f64),
    Analytic {
        f: Fn1,
        derivatives: Option<[Fn1; 2]>,
    },
    Piecewise {
        edges: Vec<f64>,
        pieces: Vec<Field1D>,
    },
    Samples {
        nodes: Vec<f64>,
        values: Vec<f64>,
        derivatives: Option<[Vec<f64>; 2]>,
    },
}

/// A real function on an interval `[0, h]`.
#[derive(Clone)]
pub struct Field1D {
    repr: Repr1D,
}

impl fmt::Debug for Field1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr1D::Constant(c) => write!(f, "Field1D::Constant({c})"),
            Repr1D::Analytic { derivatives, .. } => write!(
                f,
                "Field1D::Analytic {{ derivatives: {} }}",
                derivatives.is_some()
            ),
            Repr1D::Piecewise { edges, .. } => write!(f, "Field1D::Piecewise({edges:?})"),
            Repr1D::Samples { nodes, .. } => write!(f, "Field1D::Samples({} nodes)", nodes.len()),
        }
    }
}

impl Field1D {
    pub fn constant(c: f64) -> Self {
        Self {
            repr: Repr1D::Constant(c),
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn analytic(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            repr: Repr1D::Analytic {
                f: Arc::new(f),
                derivatives: None,
            },
        }
    }

    /// Analytic function together with its first and second derivatives.
    pub fn analytic_with_derivatives(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            repr: Repr1D::Analytic {
                f: Arc::new(f),
                derivatives: Some([Arc::new(d1), Arc::new(d2)]),
            },
        }
    }

    /// `pieces[k]` applies on `[edges[k], edges[k + 1]]`; at an interior edge
    /// the left piece wins.
    pub fn piecewise(edges: Vec<f64>, pieces: Vec<Field1D>) -> Result<Self> {
        if edges.len() != pieces.len() + 1 || pieces.is_empty() {
            return Err(Error::invalid(
                "piecewise field needs one more edge than pieces",
            ));
        }
        if edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid(
                "piecewise edges must be strictly increasing",
            ));
        }
        Ok(Self {
            repr: Repr1D::Piecewise { edges, pieces },
        })
    }

    /// Linear interpolant of node samples.
    pub fn samples(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() != values.len() || nodes.len() < 2 {
            return Err(Error::shape(
                "sample nodes and values must match and hold >= 2 points",
            ));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("sample nodes must be strictly increasing"));
        }
        Ok(Self {
            repr: Repr1D::Samples {
                nodes,
                values,
                derivatives: None,
            },
        })
    }

    /// Attaches sampled first and second derivatives to a samples field.
    pub fn with_derivative_samples(self, d1: Vec<f64>, d2: Vec<f64>) -> Result<Self> {
        match self.repr {
            Repr1D::Samples { nodes, values, .. } => {
                if d1.len() != nodes.len() || d2.len() != nodes.len() {
                    return Err(Error::shape("derivative samples must match the nodes"));
                }
                Ok(Self {
                    repr: Repr1D::Samples {
                        nodes,
                        values,
                        derivatives: Some([d1, d2]),
                    },
                })
            }
            _ => Err(Error::invalid(
                "derivative samples only attach to a samples field",
            )),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.repr {
            Repr1D::Constant(c) => *c,
            Repr1D::Analytic { f, .. } => f(t),
            Repr1D::Piecewise { edges, pieces } => pieces[piece_index(edges, t)].eval(t),
            Repr1D::Samples { nodes, values, .. } => interp_linear(nodes, values, t),
        }
    }

    /// Derivative of order 1 or 2 when an evaluator is available.
    pub fn derivative(&self, order: usize, t: f64) -> Option<f64> {
        assert!(order == 1 || order == 2, "derivative order must be 1 or 2");
        match &self.repr {
            Repr1D::Constant(_) => Some(0.0),
            Repr1D::Analytic { derivatives, .. } => derivatives.as_ref().map(|d| d[order - 1](t)),
            Repr1D::Piecewise { edges, pieces } => {
                pieces[piece_index(edges, t)].derivative(order, t)
            }
            Repr1D::Samples {
                nodes, derivatives, ..
            } => derivatives
                .as_ref()
                .map(|d| interp_linear(nodes, &d[order - 1], t)),
        }
    }

    pub fn has_derivatives(&self) -> bool {
        match &self.repr {
            Repr1D::Constant(_) => true,
            Repr1D::Analytic { derivatives, .. } => derivatives.is_some(),
            Repr1D::Piecewise { pieces, .. } => pieces.iter().all(Field1D::has_derivatives),
            Repr1D::Samples { derivatives, .. } => derivatives.is_some(),
        }
    }

    /// Node values of a samples field, if it is one.
    pub fn sample_nodes(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr1D::Samples { nodes, .. } => Some(nodes),
            _ => None,
        }
    }

    pub fn sample_values(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr1D::Samples { values, .. } => Some(values),
            _ => None,
        }
    }

    pub fn is_analytic(&self) -> bool {
        !matches!(self.repr, Repr1D::Samples { .. })
    }

    pub fn sample(&self, axis: &Axis) -> Vec<f64> {
        axis.nodes().iter().map(|&t| self.eval(t)).collect()
    }

    /// `a f + b g` as an analytic field; derivatives carry over when both
    /// operands have them.
    pub fn combine(a: f64, f: &Field1D, b: f64, g: &Field1D) -> Field1D {
        if let (Repr1D::Constant(c), Repr1D::Constant(d)) = (&f.repr, &g.repr) {
            return Field1D::constant(a * c + b * d);
        }
        let (f0, g0) = (f.clone(), g.clone());
        if f.has_derivatives() && g.has_derivatives() {
            let (f1, g1, f2, g2) = (f.clone(), g.clone(), f.clone(), g.clone());
            Field1D::analytic_with_derivatives(
                move |t| a * f0.eval(t) + b * g0.eval(t),
                move |t| {
                    a * f1.derivative(1, t).unwrap_or(0.0) + b * g1.derivative(1, t).unwrap_or(0.0)
                },
                move |t| {
                    a * f2.derivative(2, t).unwrap_or(0.0) + b * g2.derivative(2, t).unwrap_or(0.0)
                },
            )
        } else {
            Field1D::analytic(move |t| a * f0.eval(t) + b * g0.eval(t))
        }
    }

    /// Interior points where the field may be nonsmooth.
    fn kinks(&self) -> Vec<f64> {
        match &self.repr {
            Repr1D::Constant(_) | Repr1D::Analytic { .. } => Vec::new(),
            Repr1D::Piecewise { edges, pieces } => {
                let mut out = edges.clone();
                for p in pieces {
                    out.extend(p.kinks());
                }
                out
            }
            Repr1D::Samples { nodes, .. } => nodes.clone(),
        }
    }

    /// `int_0^length (length - s) f(s) ds`, computed to near machine precision
    /// with composite Gauss-Legendre split at the field's kinks.
    pub fn accurate_moment(&self, length: f64) -> f64 {
        self.gauss(length, |t| length - t)
    }

    /// `int_0^length f(s) ds`, computed like [`Field1D::accurate_moment`].
    pub fn accurate_integral(&self, length: f64) -> f64 {
        self.gauss(length, |_| 1.0)
    }

    fn gauss(&self, length: f64, weight: impl Fn(f64) -> f64) -> f64 {
        let mut cuts: Vec<f64> = self
            .kinks()
            .into_iter()
            .filter(|&t| t > 0.0 && t < length)
            .collect();
        cuts.push(0.0);
        cuts.push(length);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        // sample panels hold polynomials of degree <= 2 after the weight, so
        // one Gauss panel each is exact; analytic pieces get subdivided
        let sub = if matches!(self.repr, Repr1D::Samples { .. }) {
            1
        } else {
            64
        };
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let step = (b - a) / sub as f64;
            for s in 0..sub {
                let lo = a + s as f64 * step;
                let mid = lo + 0.5 * step;
                for (node, gw) in GAUSS5 {
                    let t = mid + 0.5 * step * node;
                    // stay inside the panel so piecewise lookups pick this piece
                    total += 0.5 * step * gw * weight(t) * self.eval(t);
                }
            }
        }
        total
    }
}

const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_08),
    (0.906_179_845_938_664, 0.236_926_885_056_189_08),
];

fn piece_index(edges: &[f64], t: f64) -> usize {
    let last = edges.len() - 2;
    // first piece whose right edge is >= t
    edges[1..].partition_point(|&e| e < t).min(last)
}

fn interp_linear(nodes: &[f64], values: &[f64], t: f64) -> f64 {
    let n = nodes.len();
    let k = nodes.partition_point(|&s| s <= t);
    if k == 0 {
        return values[0];
    }
    if k >= n {
        return values[n - 1];
    }
    let (x0, x1) = (nodes[k - 1], nodes[k]);
    let lam = (t - x0) / (x1 - x0);
    values[k - 1] + lam * (values[k] - values[k - 1])
}

/// Axis-aligned closed rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }
}

#[derive(Clone)]
enum Repr2D {
    Constant(f64),
    Analytic(Fn2),
    Piecewise(Vec<(Rect, Field2D)>),
    Samples {
        x: Vec<f64>,
        y: Vec<f64>,
        values: Vec<f64>,
    },
}

/// A real function on the closed rectangle.
#[derive(Clone)]
pub struct Field2D {
    repr: Repr2D,
    tag: SmoothnessTag,
}

impl fmt::Debug for Field2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.repr {
            Repr2D::Constant(c) => format!("Constant({c})"),
            Repr2D::Analytic(_) => "Analytic".to_string(),
            Repr2D::Piecewise(p) => format!("Piecewise({} pieces)", p.len()),
            Repr2D::Samples { x, y, .. } => format!("Samples({}x{})", x.len(), y.len()),
        };
        write!(f, "Field2D::{kind} [{:?}]", self.tag)
    }
}

impl Field2D {
    pub fn constant(c: f64) -> Self {
        Self {
            repr: Repr2D::Constant(c),
            tag: SmoothnessTag::Continuous,
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn analytic(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            repr: Repr2D::Analytic(Arc::new(f)),
            tag: SmoothnessTag::Continuous,
        }
    }

    /// Piecewise field over rectangles that must partition the domain
    /// exactly. On shared edges the rectangle with the lexicographically
    /// smallest lower-left corner `(x0, y0)` supplies the value.
    pub fn piecewise(domain: Domain, pieces: Vec<(Rect, Field2D)>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::invalid("piecewise field needs at least one piece"));
        }
        let tol = 1e-12 * domain.h1().max(domain.h2());
        for (r, _) in &pieces {
            if !(r.x1 > r.x0 && r.y1 > r.y0) {
                return Err(Error::invalid(format!("degenerate rectangle {r:?}")));
            }
            if r.x0 < -tol || r.y0 < -tol || r.x1 > domain.h1() + tol || r.y1 > domain.h2() + tol {
                return Err(Error::invalid(format!("rectangle {r:?} leaves the domain")));
            }
        }
        let mut xs: Vec<f64> = vec![0.0, domain.h1()];
        let mut ys: Vec<f64> = vec![0.0, domain.h2()];
        for (r, _) in &pieces {
            xs.extend([r.x0, r.x1]);
            ys.extend([r.y0, r.y1]);
        }
        for v in [&mut xs, &mut ys] {
            v.sort_by(f64::total_cmp);
            v.dedup_by(|a, b| (*a - *b).abs() <= tol);
        }
        for wx in xs.windows(2) {
            for wy in ys.windows(2) {
                let cx = 0.5 * (wx[0] + wx[1]);
                let cy = 0.5 * (wy[0] + wy[1]);
                let hits = pieces.iter().filter(|(r, _)| r.contains(cx, cy)).count();
                if hits != 1 {
                    let what = if hits == 0 { "gap" } else { "overlap" };
                    return Err(Error::invalid(format!(
                        "piecewise rectangles leave a {what} around ({cx}, {cy})"
                    )));
                }
            }
        }
        let mut pieces = pieces;
        pieces.sort_by(|(a, _), (b, _)| a.x0.total_cmp(&b.x0).then(a.y0.total_cmp(&b.y0)));
        let tag = if pieces
            .iter()
            .all(|(_, f)| f.tag.implies(SmoothnessTag::Bounded))
        {
            SmoothnessTag::Bounded
        } else {
            SmoothnessTag::Lp
        };
        Ok(Self {
            repr: Repr2D::Piecewise(pieces),
            tag,
        })
    }

    /// Node samples on a tensor grid, bilinearly interpolated off-node.
    /// Values are laid out with y outermost.
    pub fn samples(x: Vec<f64>, y: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if x.len() < 2 || y.len() < 2 || values.len() != x.len() * y.len() {
            return Err(Error::shape("2D samples must form a full tensor grid"));
        }
        Ok(Self {
            repr: Repr2D::Samples { x, y, values },
            tag: SmoothnessTag::Bounded,
        })
    }

    /// `a f + b g` as an analytic field.
    pub fn combine(a: f64, f: &Field2D, b: f64, g: &Field2D) -> Field2D {
        let tag = if f.tag.implies(g.tag) {
            g.tag
        } else if g.tag.implies(f.tag) {
            f.tag
        } else {
            SmoothnessTag::Lp
        };
        if let (Repr2D::Constant(c), Repr2D::Constant(d)) = (&f.repr, &g.repr) {
            return Field2D::constant(a * c + b * d);
        }
        let (f0, g0) = (f.clone(), g.clone());
        Field2D::analytic(move |x, y| a * f0.eval(x, y) + b * g0.eval(x, y)).with_tag(tag)
    }

    pub fn with_tag(mut self, tag: SmoothnessTag) -> Self {
        self.tag = tag;
        self
    }

    pub fn tag(&self) -> SmoothnessTag {
        self.tag
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.repr, Repr2D::Constant(c) if c == 0.0)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match &self.repr {
            Repr2D::Constant(c) => *c,
            Repr2D::Analytic(f) => f(x, y),
            Repr2D::Piecewise(pieces) => {
                let hit = pieces.iter().find(|(r, _)| r.contains(x, y));
                match hit {
                    Some((_, f)) => f.eval(x, y),
                    None => {
                        // outside the closed domain: evaluate at the nearest point
                        let (xmax, ymax) = pieces.iter().fold((0.0f64, 0.0f64), |acc, (r, _)| {
                            (acc.0.max(r.x1), acc.1.max(r.y1))
                        });
                        let (cx, cy) = (x.clamp(0.0, xmax), y.clamp(0.0, ymax));
                        pieces
                            .iter()
                            .find(|(r, _)| r.contains(cx, cy))
                            .map_or(0.0, |(_, f)| f.eval(cx, cy))
                    }
                }
            }
            Repr2D::Samples {
                x: xs,
                y: ys,
                values,
            } => bilinear(xs, ys, values, x, y),
        }
    }

    /// Interior discontinuity lines `(x_lines, y_lines)` of piecewise fields.
    pub fn breakpoints(&self) -> (Vec<f64>, Vec<f64>) {
        match &self.repr {
            Repr2D::Piecewise(pieces) => {
                let mut xs = Vec::new();
                let mut ys = Vec::new();
                for (r, f) in pieces {
                    xs.extend([r.x0, r.x1]);
                    ys.extend([r.y0, r.y1]);
                    let (fx, fy) = f.breakpoints();
                    xs.extend(fx);
                    ys.extend(fy);
                }
                (xs, ys)
            }
            _ => (Vec::new(), Vec::new()),
        }
    }

    pub fn sample(&self, grid: &Arc<Grid2D>) -> GridFn2D {
        let mut values = Vec::with_capacity(grid.len());
        for &y in grid.y().nodes() {
            for &x in grid.x().nodes() {
                values.push(self.eval(x, y));
            }
        }
        GridFn2D::new(grid.clone(), values).expect("sample size matches grid")
    }
}

fn bilinear(xs: &[f64], ys: &[f64], values: &[f64], x: f64, y: f64) -> f64 {
    let cell = |nodes: &[f64], t: f64| -> (usize, f64) {
        let n = nodes.len();
        let k = nodes.partition_point(|&s| s <= t).clamp(1, n - 1);
        let lam = ((t - nodes[k - 1]) / (nodes[k] - nodes[k - 1])).clamp(0.0, 1.0);
        (k - 1, lam)
    };
    let nx = xs.len();
    let (i, a) = cell(xs, x);
    let (j, b) = cell(ys, y);
    let v = |i: usize, j: usize| values[j * nx + i];
    (1.0 - a) * (1.0 - b) * v(i, j)
        + a * (1.0 - b) * v(i + 1, j)
        + (1.0 - a) * b * v(i, j + 1)
        + a * b * v(i + 1, j + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn piecewise_partition_checked() {
        let d = Domain::unit();
        let left = Rect::new(0.0, 0.5, 0.0, 1.0);
        let right = Rect::new(0.5, 1.0, 0.0, 1.0);
        let ok = Field2D::piecewise(
            d,
            vec![
                (right, Field2D::constant(2.0)),
                (left, Field2D::constant(1.0)),
            ],
        )
        .unwrap();
        assert_eq!(ok.eval(0.25, 0.3), 1.0);
        assert_eq!(ok.eval(0.75, 0.3), 2.0);
        // shared edge resolves to the lexicographically first rectangle
        assert_eq!(ok.eval(0.5, 0.3), 1.0);
        assert_eq!(ok.tag(), SmoothnessTag::Bounded);
        assert_eq!(ok.breakpoints().0.iter().filter(|&&x| x == 0.5).count(), 2);

        let gap = Field2D::piecewise(d, vec![(Rect::new(0.0, 0.5, 0.0, 1.0), Field2D::zero())]);
        assert!(gap.is_err());
        let overlap = Field2D::piecewise(
            d,
            vec![
                (Rect::new(0.0, 0.6, 0.0, 1.0), Field2D::zero()),
                (Rect::new(0.5, 1.0, 0.0, 1.0), Field2D::zero()),
            ],
        );
        assert!(overlap.is_err());
    }

    #[test]
    fn bilinear_samples_reproduce_bilinear_functions() {
        let x = vec![0.0, 0.4, 1.0];
        let y = vec![0.0, 0.5, 1.0];
        let f = |x: f64, y: f64| 1.0 + 2.0 * x - y + 3.0 * x * y;
        let mut v = Vec::new();
        for &yy in &y {
            for &xx in &x {
                v.push(f(xx, yy));
            }
        }
        let field = Field2D::samples(x, y, v).unwrap();
        for (px, py) in [(0.1, 0.2), (0.7, 0.9), (0.4, 0.5), (1.0, 0.0)] {
            assert!((field.eval(px, py) - f(px, py)).abs() < 1e-14);
        }
    }

    #[test]
    fn accurate_moment_of_smooth_and_sampled() {
        let f = Field1D::analytic(|t: f64| t.exp());
        // int_0^1 (1 - s) e^s ds = e - 2
        assert!((f.accurate_moment(1.0) - (std::f64::consts::E - 2.0)).abs() < 1e-14);
        let s = Field1D::samples(vec![0.0, 0.3, 1.0], vec![0.0, 0.3, 1.0]).unwrap();
        // identity function: int_0^1 (1 - s) s ds = 1/6
        assert!((s.accurate_moment(1.0) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn piecewise_1d_lookup() {
        let f = Field1D::piecewise(
            vec![0.0, 0.5, 1.0],
            vec![Field1D::constant(1.0), Field1D::constant(3.0)],
        )
        .unwrap();
        assert_eq!(f.eval(0.5), 1.0);
        assert_eq!(f.eval(0.75), 3.0);
        // int_0^.5 (1 - s) ds + 3 int_.5^1 (1 - s) ds = 3/8 + 3/8
        assert!((f.accurate_moment(1.0) - 0.75).abs() < 1e-14);
    }

    #[test]
    fn tag_implications() {
        use SmoothnessTag::*;
        assert!(Continuous.implies(LinfXLpY));
        assert!(Bounded.implies(LpXLinfY));
        assert!(LinfXLpY.implies(Lp));
        assert!(!Lp.implies(LinfXLpY));
        assert!(!LinfXLpY.implies(LpXLinfY));
    }
}
