use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Deserialize;

use super::expr::Expr;
use super::quadrature::{for_each_node, QuadratureConfig};
use super::CoeffError;
use crate::graph::MetricGraph;

/// One coefficient on one edge, in the coordinate of the edge as it appears
/// in the input document.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientSpec {
    Constant(f64),
    /// `(start, value)` pairs: `value` holds from `start` to the next start
    /// (or the end of the edge). The first start is `0`.
    Piecewise(Vec<(f64, f64)>),
    Expression(Expr),
}

impl CoefficientSpec {
    pub fn expr(src: &str) -> Result<Self, CoeffError> {
        let e = Expr::parse(src)?;
        Ok(match e.as_constant() {
            Some(c) => CoefficientSpec::Constant(c),
            None => CoefficientSpec::Expression(e),
        })
    }

    pub fn piecewise(pieces: Vec<(f64, f64)>) -> Result<Self, CoeffError> {
        if pieces.is_empty() || pieces[0].0 != 0.0 {
            return Err(CoeffError::Spec(
                "piecewise table must start at offset 0".into(),
            ));
        }
        if pieces.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(CoeffError::Spec(
                "piecewise breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(CoefficientSpec::Piecewise(pieces))
    }

    fn value(&self, x: f64) -> f64 {
        match self {
            CoefficientSpec::Constant(c) => *c,
            CoefficientSpec::Piecewise(pieces) => {
                let idx = pieces.partition_point(|&(b, _)| b <= x);
                pieces[idx.saturating_sub(1)].1
            }
            CoefficientSpec::Expression(e) => e.value(x),
        }
    }

    fn is_smooth_expression(&self) -> bool {
        matches!(self, CoefficientSpec::Expression(_))
    }

    fn breakpoints(&self) -> &[(f64, f64)] {
        match self {
            CoefficientSpec::Piecewise(p) => p,
            _ => &[],
        }
    }

    fn scaled(&self, c: f64) -> CoefficientSpec {
        use super::expr::BinOp;
        match self {
            CoefficientSpec::Constant(v) => CoefficientSpec::Constant(c * v),
            CoefficientSpec::Piecewise(p) => {
                CoefficientSpec::Piecewise(p.iter().map(|&(b, v)| (b, c * v)).collect())
            }
            CoefficientSpec::Expression(e) => CoefficientSpec::Expression(Expr::Binary(
                BinOp::Mul,
                Box::new(Expr::Num(c)),
                Box::new(e.clone()),
            )),
        }
    }
}

/// Values of the three coefficients at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub p: f64,
    pub q: f64,
    pub w: f64,
}

impl Sample {
    pub fn q_plus(&self) -> f64 {
        self.q.max(0.0)
    }

    pub fn q_minus(&self) -> f64 {
        (-self.q).max(0.0)
    }
}

/// Which derived quantity to integrate along an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrand {
    P,
    InvP,
    Q,
    QPlus,
    QMinus,
    W,
    /// `sqrt(w / p)`, the density of the cutoff construction.
    SqrtWOverP,
}

impl Integrand {
    pub fn of(self, s: &Sample) -> f64 {
        match self {
            Integrand::P => s.p,
            Integrand::InvP => 1.0 / s.p,
            Integrand::Q => s.q,
            Integrand::QPlus => s.q_plus(),
            Integrand::QMinus => s.q_minus(),
            Integrand::W => s.w,
            Integrand::SqrtWOverP => (s.w / s.p).sqrt(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Integrand::P => "p",
            Integrand::InvP => "1/p",
            Integrand::Q => "q",
            Integrand::QPlus => "q+",
            Integrand::QMinus => "q-",
            Integrand::W => "w",
            Integrand::SqrtWOverP => "sqrt(w/p)",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coefficient {
    P,
    Q,
    W,
}

impl Coefficient {
    pub fn name(self) -> &'static str {
        match self {
            Coefficient::P => "p",
            Coefficient::Q => "q",
            Coefficient::W => "w",
        }
    }
}

#[derive(Debug, Clone)]
struct EdgeCoefficients {
    p: Arc<CoefficientSpec>,
    q: Arc<CoefficientSpec>,
    w: Arc<CoefficientSpec>,
    /// Accumulated `c` from [`CoefficientField::q_shifted`]; the effective
    /// potential is `q + q_shift · w`.
    q_shift: f64,
    /// Shift from the normalized edge coordinate to the document coordinate.
    offset: f64,
    length: f64,
    edge_id: String,
}

impl EdgeCoefficients {
    fn spec(&self, c: Coefficient) -> &CoefficientSpec {
        match c {
            Coefficient::P => &self.p,
            Coefficient::Q => &self.q,
            Coefficient::W => &self.w,
        }
    }

    fn sample(&self, x: f64) -> Sample {
        let y = x + self.offset;
        let mut s = Sample {
            p: self.p.value(y),
            q: self.q.value(y),
            w: self.w.value(y),
        };
        if self.q_shift != 0.0 {
            s.q += self.q_shift * s.w;
        }
        s
    }

    /// Breakpoints of all three coefficients strictly inside `(a, b)`, in the
    /// normalized coordinate, sorted and deduplicated.
    fn breaks_within(&self, a: f64, b: f64) -> Vec<f64> {
        let mut out: Vec<f64> = [&self.p, &self.q, &self.w]
            .iter()
            .flat_map(|s| s.breakpoints().iter().map(|&(bp, _)| bp - self.offset))
            .filter(|&x| x > a && x < b)
            .collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    fn has_expression(&self) -> bool {
        self.p.is_smooth_expression() || self.q.is_smooth_expression() || self.w.is_smooth_expression()
    }
}

/// Edgewise coefficients `p`, `q`, `w` of `(1/w)(-(p f')' + q f)`.
#[derive(Debug, Clone)]
pub struct CoefficientField {
    edges: Vec<EdgeCoefficients>,
    quadrature: QuadratureConfig,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SpecDocument {
    Number(f64),
    Table(TableDocument),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableDocument {
    #[serde(default)]
    piecewise: Option<Vec<(f64, f64)>>,
    #[serde(default)]
    expr: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryDocument {
    #[serde(default)]
    p: Option<SpecDocument>,
    #[serde(default)]
    q: Option<SpecDocument>,
    #[serde(default)]
    w: Option<SpecDocument>,
}

fn spec_from_document(doc: SpecDocument, field: &str) -> Result<CoefficientSpec, CoeffError> {
    let wrap = |e: CoeffError| CoeffError::Document(format!("{field}: {e}"));
    match doc {
        SpecDocument::Number(v) => Ok(CoefficientSpec::Constant(v)),
        SpecDocument::Table(TableDocument {
            piecewise: Some(p),
            expr: None,
        }) => CoefficientSpec::piecewise(p).map_err(wrap),
        SpecDocument::Table(TableDocument {
            piecewise: None,
            expr: Some(src),
        }) => CoefficientSpec::expr(&src).map_err(wrap),
        SpecDocument::Table(_) => Err(CoeffError::Document(format!(
            "{field}: expected exactly one of `piecewise` or `expr`"
        ))),
    }
}

impl CoefficientField {
    /// The same three specs on every edge.
    pub fn uniform(g: &MetricGraph, p: CoefficientSpec, q: CoefficientSpec, w: CoefficientSpec) -> Self {
        let (p, q, w) = (Arc::new(p), Arc::new(q), Arc::new(w));
        let edges = g
            .edges()
            .iter()
            .map(|e| EdgeCoefficients {
                p: p.clone(),
                q: q.clone(),
                w: w.clone(),
                q_shift: 0.0,
                offset: e.coefficient_offset(),
                length: e.length,
                edge_id: e.id.clone(),
            })
            .collect();
        CoefficientField {
            edges,
            quadrature: QuadratureConfig::default(),
        }
    }

    /// `p = w = 1`, `q = 0`.
    pub fn free(g: &MetricGraph) -> Self {
        Self::uniform(
            g,
            CoefficientSpec::Constant(1.0),
            CoefficientSpec::Constant(0.0),
            CoefficientSpec::Constant(1.0),
        )
    }

    /// Parses a coefficient document: a JSON object mapping edge ids (or
    /// `"default"`) to `{"p": spec, "q": spec, "w": spec}`. Missing entries
    /// fall back to `"default"`, then to `p = 1, q = 0, w = 1`.
    pub fn from_json(text: &str, g: &MetricGraph) -> Result<Self, CoeffError> {
        let raw: BTreeMap<String, EntryDocument> = serde_json::from_str(text).map_err(|e| {
            CoeffError::Document(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        let mut entries = BTreeMap::new();
        for (key, entry) in raw {
            let resolve = |d: Option<SpecDocument>, name: &str| -> Result<Option<CoefficientSpec>, CoeffError> {
                d.map(|d| spec_from_document(d, &format!("{key}.{name}"))).transpose()
            };
            let specs = (resolve(entry.p, "p")?, resolve(entry.q, "q")?, resolve(entry.w, "w")?);
            entries.insert(key, specs);
        }
        let known: std::collections::HashSet<&str> =
            g.edges().iter().map(|e| e.coefficient_id()).collect();
        if let Some(bad) = entries
            .keys()
            .find(|k| k.as_str() != "default" && !known.contains(k.as_str()))
        {
            return Err(CoeffError::Document(format!("unknown edge id `{bad}`")));
        }
        let default = entries.get("default").cloned().unwrap_or((None, None, None));
        let fallback = |s: &Option<CoefficientSpec>, d: &Option<CoefficientSpec>, v: f64| {
            Arc::new(s.clone().or_else(|| d.clone()).unwrap_or(CoefficientSpec::Constant(v)))
        };
        let edges = g
            .edges()
            .iter()
            .map(|e| {
                let own = entries
                    .get(e.coefficient_id())
                    .cloned()
                    .unwrap_or((None, None, None));
                EdgeCoefficients {
                    p: fallback(&own.0, &default.0, 1.0),
                    q: fallback(&own.1, &default.1, 0.0),
                    w: fallback(&own.2, &default.2, 1.0),
                    q_shift: 0.0,
                    offset: e.coefficient_offset(),
                    length: e.length,
                    edge_id: e.id.clone(),
                }
            })
            .collect();
        Ok(CoefficientField {
            edges,
            quadrature: QuadratureConfig::default(),
        })
    }

    pub fn with_quadrature(mut self, quadrature: QuadratureConfig) -> Self {
        self.quadrature = quadrature;
        self
    }

    pub fn quadrature(&self) -> &QuadratureConfig {
        &self.quadrature
    }

    /// Replaces one coefficient on one edge. The spec is read in the document
    /// coordinate of the edge, which differs from the local one only on split
    /// loop or parallel-edge halves.
    pub fn set(&mut self, edge: usize, which: Coefficient, spec: CoefficientSpec) {
        let e = &mut self.edges[edge];
        let spec = Arc::new(spec);
        match which {
            Coefficient::P => e.p = spec,
            Coefficient::Q => e.q = spec,
            Coefficient::W => e.w = spec,
        }
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn spec(&self, edge: usize, which: Coefficient) -> &CoefficientSpec {
        self.edges[edge].spec(which)
    }

    /// `(c p, c q, c w)`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        for e in &mut out.edges {
            e.p = Arc::new(e.p.scaled(c));
            e.q = Arc::new(e.q.scaled(c));
            e.w = Arc::new(e.w.scaled(c));
        }
        out
    }

    /// `q → q + c w`. Constant pairs are folded; otherwise the shift is
    /// applied at sampling time, so [`spec`](Self::spec) keeps returning the
    /// unshifted `q`.
    pub fn q_shifted(&self, c: f64) -> Self {
        let mut out = self.clone();
        for e in &mut out.edges {
            match (&*e.q, &*e.w) {
                (CoefficientSpec::Constant(q), CoefficientSpec::Constant(w)) if e.q_shift == 0.0 => {
                    e.q = Arc::new(CoefficientSpec::Constant(q + c * w));
                }
                _ => e.q_shift += c,
            }
        }
        out
    }

    pub fn sample(&self, edge: usize, x: f64) -> Sample {
        self.edges[edge].sample(x)
    }

    pub fn edge_length(&self, edge: usize) -> f64 {
        self.edges[edge].length
    }

    /// Points where the coefficients are sampled for positivity and infimum
    /// checks: a uniform grid of `per_edge` cells plus both sides of every
    /// breakpoint.
    pub fn sample_points(&self, edge: usize, per_edge: usize) -> Vec<f64> {
        let e = &self.edges[edge];
        let mut pts: Vec<f64> = (0..=per_edge)
            .map(|i| e.length * i as f64 / per_edge as f64)
            .collect();
        let breaks = e.breaks_within(0.0, e.length);
        let mut prev = 0.0;
        for &b in breaks.iter().chain(std::iter::once(&e.length)) {
            pts.push(b);
            pts.push(0.5 * (prev + b));
            prev = b;
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Visits the quadrature nodes of `[a, b]` on `edge` with their weights.
    /// Intervals are split at coefficient breakpoints; each piece gets one
    /// Gauss panel when every coefficient is piecewise constant (exact for
    /// polynomial weights up to degree 9), otherwise the configured composite
    /// rule.
    pub fn visit_nodes(
        &self,
        edge: usize,
        a: f64,
        b: f64,
        mut f: impl FnMut(f64, f64, &Sample),
    ) -> Result<(), CoeffError> {
        let e = &self.edges[edge];
        if !(0.0 <= a && a <= b && b <= e.length * (1.0 + 1e-12)) {
            return Err(CoeffError::Range {
                edge: e.edge_id.clone(),
                a,
                b,
                length: e.length,
            });
        }
        let smooth = e.has_expression();
        let mut lo = a;
        let breaks = e.breaks_within(a, b);
        for hi in breaks.into_iter().chain(std::iter::once(b)) {
            if hi > lo {
                let panels = if smooth {
                    self.quadrature.panels_for(hi - lo)
                } else {
                    1
                };
                let order = if smooth { self.quadrature.order } else { 5 };
                for_each_node(lo, hi, panels, order, |x, wt| f(x, wt, &e.sample(x)));
            }
            lo = hi;
        }
        Ok(())
    }

    /// Integrates `f(x, sample)` over `[a, b]` on `edge` with the rule of
    /// [`visit_nodes`](Self::visit_nodes).
    pub fn integrate_with(
        &self,
        edge: usize,
        a: f64,
        b: f64,
        f: impl Fn(f64, &Sample) -> f64,
    ) -> Result<f64, CoeffError> {
        let mut sum = 0.0;
        let mut bad = None;
        self.visit_nodes(edge, a, b, |x, wt, s| {
            let v = f(x, s);
            if !v.is_finite() && bad.is_none() {
                bad = Some(x);
            }
            sum += wt * v;
        })?;
        match bad {
            Some(x) => Err(CoeffError::Integrability {
                edge: self.edges[edge].edge_id.clone(),
                x,
            }),
            None => Ok(sum),
        }
    }

    pub fn edge_id(&self, edge: usize) -> &str {
        &self.edges[edge].edge_id
    }

    /// `∫_a^b` of the chosen integrand along `edge`.
    pub fn edge_integral(&self, edge: usize, which: Integrand, a: f64, b: f64) -> Result<f64, CoeffError> {
        self.integrate_with(edge, a, b, |_, s| which.of(s))
    }

    /// Checks `p > 0` and `w > 0` at every sample point and quadrature node of
    /// the given edge.
    pub fn check_positive(&self, edge: usize, per_edge: usize) -> Result<(), CoeffError> {
        let e = &self.edges[edge];
        let mut pts = self.sample_points(edge, per_edge);
        let mut lo = 0.0;
        for hi in e.breaks_within(0.0, e.length).into_iter().chain(std::iter::once(e.length)) {
            let panels = self.quadrature.panels_for(hi - lo);
            for_each_node(lo, hi, panels, self.quadrature.order, |x, _| pts.push(x));
            lo = hi;
        }
        for x in pts {
            let s = e.sample(x);
            for (which, v) in [(Coefficient::P, s.p), (Coefficient::W, s.w)] {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(CoeffError::NotPositive {
                        edge: e.edge_id.clone(),
                        coefficient: which.name(),
                        x,
                        value: v,
                    });
                }
            }
            if !s.q.is_finite() {
                return Err(CoeffError::Integrability {
                    edge: e.edge_id.clone(),
                    x,
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families;

    fn unit_edge() -> MetricGraph {
        families::path(1, 1.0)
    }

    #[test]
    fn constant_integrals() {
        let g = unit_edge();
        let f = CoefficientField::free(&g);
        assert_eq!(f.edge_integral(0, Integrand::P, 0.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn piecewise_q_split_into_parts() {
        let g = unit_edge();
        let mut f = CoefficientField::free(&g);
        f.set(
            0,
            Coefficient::Q,
            CoefficientSpec::piecewise(vec![(0.0, -2.0), (0.5, 1.0)]).unwrap(),
        );
        let minus = f.edge_integral(0, Integrand::QMinus, 0.0, 1.0).unwrap();
        let plus = f.edge_integral(0, Integrand::QPlus, 0.0, 1.0).unwrap();
        assert!((minus - 1.0).abs() < 1e-15);
        assert!((plus - 0.5).abs() < 1e-15);
        let q = f.edge_integral(0, Integrand::Q, 0.0, 1.0).unwrap();
        assert!((q - (plus - minus)).abs() < 1e-15);
    }

    #[test]
    fn exponential_weight_against_antiderivative() {
        let g = unit_edge();
        let mut f = CoefficientField::free(&g);
        f.set(0, Coefficient::W, CoefficientSpec::expr("exp(x)").unwrap());
        let v = f.edge_integral(0, Integrand::W, 0.0, 1.0).unwrap();
        assert!((v - (std::f64::consts::E - 1.0)).abs() <= 1e-12);
    }

    #[test]
    fn nonfinite_sample_is_integrability_violation() {
        let g = unit_edge();
        let mut f = CoefficientField::free(&g);
        f.set(0, Coefficient::Q, CoefficientSpec::expr("1/(x-0.5)").unwrap());
        // 0.5 is the Gauss midpoint of a single panel
        let f = f.with_quadrature(QuadratureConfig {
            order: 5,
            panels_per_unit: 1.0,
            min_panels: 1,
        });
        assert!(matches!(
            f.edge_integral(0, Integrand::Q, 0.0, 1.0),
            Err(CoeffError::Integrability { .. })
        ));
    }

    #[test]
    fn range_is_checked() {
        let g = unit_edge();
        let f = CoefficientField::free(&g);
        assert!(f.edge_integral(0, Integrand::W, 0.5, 0.25).is_err());
        assert!(f.edge_integral(0, Integrand::W, 0.0, 1.5).is_err());
    }

    #[test]
    fn document_defaults_and_overrides() {
        let g = families::path(2, 1.0);
        let doc = r#"{
            "default": {"p": 2},
            "e1": {"q": {"piecewise": [[0, -5], [0.5, 0]]}, "w": {"expr": "1 + x"}}
        }"#;
        let f = CoefficientField::from_json(doc, &g).unwrap();
        assert_eq!(f.sample(0, 0.3), Sample { p: 2.0, q: 0.0, w: 1.0 });
        assert_eq!(f.sample(1, 0.25), Sample { p: 2.0, q: -5.0, w: 1.25 });
        assert_eq!(f.sample(1, 0.75).q, 0.0);
    }

    #[test]
    fn document_errors() {
        let g = families::path(2, 1.0);
        assert!(CoefficientField::from_json(r#"{"nope": {"p": 1}}"#, &g).is_err());
        assert!(CoefficientField::from_json(r#"{"e0": {"r": 1}}"#, &g).is_err());
        assert!(CoefficientField::from_json(r#"{"e0": {"p": {"expr": "1+"}}}"#, &g).is_err());
        assert!(
            CoefficientField::from_json(r#"{"e0": {"p": {"piecewise": [[0.2, 1]]}}}"#, &g).is_err()
        );
        assert!(CoefficientField::from_json(r#"{"e0": {"p": {"expr": "x", "piecewise": [[0,1]]}}}"#, &g)
            .is_err());
    }

    #[test]
    fn split_loop_halves_see_parent_coordinate() {
        let g = MetricGraph::from_json(
            r#"{"vertices":["a"],"edges":[{"id":"l","from":"a","to":"a","length":2}]}"#,
        )
        .unwrap();
        let f = CoefficientField::from_json(r#"{"l": {"w": {"expr": "1 + x"}}}"#, &g).unwrap();
        assert_eq!(f.sample(0, 0.5).w, 1.5);
        assert_eq!(f.sample(1, 0.5).w, 2.5);
        let total: f64 = (0..2)
            .map(|e| f.edge_integral(e, Integrand::W, 0.0, 1.0).unwrap())
            .sum();
        assert!((total - 4.0).abs() < 1e-14);
    }

    #[test]
    fn positivity_check() {
        let g = unit_edge();
        let mut f = CoefficientField::free(&g);
        assert!(f.check_positive(0, 16).is_ok());
        f.set(0, Coefficient::W, CoefficientSpec::piecewise(vec![(0.0, 1.0), (0.9, 0.0)]).unwrap());
        assert!(matches!(
            f.check_positive(0, 16),
            Err(CoeffError::NotPositive { coefficient: "w", .. })
        ));
    }

    #[test]
    fn shifts_and_scaling() {
        let g = unit_edge();
        let mut f = CoefficientField::free(&g);
        f.set(0, Coefficient::Q, CoefficientSpec::piecewise(vec![(0.0, -1.0), (0.5, 2.0)]).unwrap());
        let s = f.q_shifted(3.0);
        assert_eq!(s.sample(0, 0.25).q, 2.0);
        assert_eq!(s.sample(0, 0.75).q, 5.0);
        let c = f.scaled(0.5);
        assert_eq!(c.sample(0, 0.75), Sample { p: 0.5, q: 1.0, w: 0.5 });
    }
}
