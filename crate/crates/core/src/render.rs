//! Deterministic SVG output for 2D figures and horocycle chains.
//!
//! The curve of a cycle `(k, l, n, m)` in the point metric with
//! `e_2^2 = tau` is `k(u^2 - tau v^2) - 2lu - 2nv + m = 0`: a circle,
//! parabola or equilateral hyperbola for tau = -1, 0, 1.

use xmlwriter::{Options, XmlWriter};

use crate::contfrac::{Arrangement, HorocycleChain};
use crate::cycle::{Cycle, Metric};
use crate::error::{Error, Result};
use crate::figure::{Figure, NodeStatus, INFINITY, REAL_LINE};
use crate::numerics::eps_cmp;

pub const DEFAULT_SAMPLES: usize = 256;
const DOT_RADIUS: f64 = 3.0;
const STROKE_WIDTH: f64 = 1.5;
const AXIS_COLOUR: &str = "#bbbbbb";
const PALETTE: [&str; 5] = ["#000000", "#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// World rectangle mapped onto `width` pixels with equal scales on both
/// axes, so circles stay circles. The v axis points up.
#[derive(Debug, Clone, PartialEq)]
pub struct Viewport {
    pub umin: f64,
    pub umax: f64,
    pub vmin: f64,
    pub vmax: f64,
    pub width: f64,
    /// Samples per branch for parabolas and hyperbolas.
    pub samples: usize,
    pub labels: bool,
}

impl Default for Viewport {
    fn default() -> Viewport {
        Viewport {
            umin: -5.0,
            umax: 5.0,
            vmin: -5.0,
            vmax: 5.0,
            width: 600.0,
            samples: DEFAULT_SAMPLES,
            labels: true,
        }
    }
}

impl Viewport {
    pub fn new(umin: f64, umax: f64, vmin: f64, vmax: f64, width: f64) -> Result<Viewport> {
        let finite = [umin, umax, vmin, vmax, width].iter().all(|x| x.is_finite());
        if !finite || umax <= umin || vmax <= vmin || width <= 0.0 {
            return Err(Error::Parse(format!("bad viewport [{umin}, {umax}] x [{vmin}, {vmax}], width {width}")));
        }
        Ok(Viewport {
            umin,
            umax,
            vmin,
            vmax,
            width,
            ..Viewport::default()
        })
    }

    /// Smallest viewport containing the given boxes `(umin, umax, vmin,
    /// vmax)` with a relative margin.
    pub fn fit(boxes: &[(f64, f64, f64, f64)], margin: f64, width: f64) -> Result<Viewport> {
        let mut b = boxes.iter().copied().filter(|x| [x.0, x.1, x.2, x.3].iter().all(|v| v.is_finite()));
        let Some(first) = b.next() else {
            return Ok(Viewport::default());
        };
        let (mut u0, mut u1, mut v0, mut v1) = b.fold(first, |a, x| (a.0.min(x.0), a.1.max(x.1), a.2.min(x.2), a.3.max(x.3)));
        let pad = margin * (u1 - u0).max(v1 - v0).max(1e-9);
        u0 -= pad;
        u1 += pad;
        v0 -= pad;
        v1 += pad;
        Viewport::new(u0, u1, v0, v1, width)
    }

    pub fn scale(&self) -> f64 {
        self.width / (self.umax - self.umin)
    }

    pub fn height(&self) -> f64 {
        self.scale() * (self.vmax - self.vmin)
    }

    pub fn to_px(&self, u: f64, v: f64) -> (f64, f64) {
        let s = self.scale();
        ((u - self.umin) * s, (self.vmax - v) * s)
    }

    pub fn to_world(&self, x: f64, y: f64) -> (f64, f64) {
        let s = self.scale();
        (x / s + self.umin, self.vmax - y / s)
    }
}

/// Geometry of a cycle in world coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Circle { cu: f64, cv: f64, r: f64 },
    /// Circle of imaginary radius `r` (radius squared `-r^2`).
    Imaginary { cu: f64, cv: f64, r: f64 },
    Segment { from: (f64, f64), to: (f64, f64) },
    Polyline(Vec<(f64, f64)>),
    Dot { u: f64, v: f64 },
}

fn coeffs(c: &Cycle) -> Result<[f64; 4]> {
    let [k, l, n, m] = c
        .as_2d()
        .ok_or_else(|| Error::DimensionMismatch("only 2D cycles are drawn".into()))?;
    Ok([k.to_f64(), l.to_f64(), n.to_f64(), m.to_f64()])
}

/// `a u + b v = c` clipped to the viewport (Liang–Barsky).
fn clip_line(a: f64, b: f64, c: f64, vp: &Viewport) -> Option<Shape> {
    let nn = a * a + b * b;
    if nn == 0.0 {
        return None;
    }
    let (pu, pv) = (a * c / nn, b * c / nn);
    let (du, dv) = (-b, a);
    let mut t0 = f64::NEG_INFINITY;
    let mut t1 = f64::INFINITY;
    for (p, q) in [(-du, pu - vp.umin), (du, vp.umax - pu), (-dv, pv - vp.vmin), (dv, vp.vmax - pv)] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let t = q / p;
            if p < 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
        }
    }
    (t0 < t1).then(|| Shape::Segment {
        from: (pu + t0 * du, pv + t0 * dv),
        to: (pu + t1 * du, pv + t1 * dv),
    })
}

/// Samples `f` on `[lo, hi]` and splits the curve where it leaves the
/// band `[blo, bhi]` in the other coordinate.
fn sample(lo: f64, hi: f64, samples: usize, band: (f64, f64), f: impl Fn(f64) -> f64, swap: bool) -> Vec<Shape> {
    let mut out = vec![];
    let mut cur: Vec<(f64, f64)> = vec![];
    let n = samples.max(2);
    for i in 0..n {
        let t = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let y = f(t);
        if y.is_finite() && y >= band.0 && y <= band.1 {
            cur.push(if swap { (y, t) } else { (t, y) });
        } else if cur.len() > 1 {
            out.push(Shape::Polyline(std::mem::take(&mut cur)));
        } else {
            cur.clear();
        }
    }
    if cur.len() > 1 {
        out.push(Shape::Polyline(cur));
    }
    out
}

/// Shapes drawing `c` in the point metric `e_2^2 = tau`.
pub fn cycle_shapes(c: &Cycle, tau: i8, vp: &Viewport) -> Result<Vec<Shape>> {
    let [k, l, n, m] = coeffs(c)?;
    let eps = eps_cmp();
    if k.abs() <= eps * [l, n, m].iter().fold(1.0f64, |a, x| a.max(x.abs())) {
        return Ok(clip_line(2.0 * l, 2.0 * n, m, vp).into_iter().collect());
    }
    let t = tau as f64;
    let (cu, cv) = (l / k, -t * n / k);
    // |c|^2 - m/k with |x|^2 = u^2 - tau v^2.
    let r2 = cu * cu - t * cv * cv - m / k;
    let tol = eps * (1.0 + cu * cu + cv * cv);
    if r2.abs() <= tol && tau != 0 {
        return Ok(vec![Shape::Dot { u: cu, v: cv }]);
    }
    let ext_u = vp.umax - vp.umin;
    let ext_v = vp.vmax - vp.vmin;
    let vband = (vp.vmin - ext_v, vp.vmax + ext_v);
    let uband = (vp.umin - ext_u, vp.umax + ext_u);
    match tau {
        -1 if r2 > 0.0 => Ok(vec![Shape::Circle { cu, cv, r: r2.sqrt() }]),
        -1 => Ok(vec![Shape::Imaginary { cu, cv, r: (-r2).sqrt() }]),
        0 => {
            if n.abs() > eps {
                let f = move |u: f64| (k * u * u - 2.0 * l * u + m) / (2.0 * n);
                Ok(sample(vp.umin, vp.umax, vp.samples, vband, f, false))
            } else {
                // k u^2 - 2 l u + m = 0: zero, one or two vertical lines.
                let disc = l * l - k * m;
                if disc < -eps {
                    return Ok(vec![]);
                }
                let s = disc.max(0.0).sqrt();
                let mut roots = vec![(l - s) / k];
                if s > eps {
                    roots.push((l + s) / k);
                }
                Ok(roots.into_iter().filter_map(|u| clip_line(1.0, 0.0, u, vp)).collect())
            }
        }
        _ => {
            let mut out = vec![];
            if r2 > 0.0 {
                // (u - cu)^2 - (v - cv)^2 = r2: left and right branches.
                for sgn in [-1.0, 1.0] {
                    let f = move |v: f64| cu + sgn * (r2 + (v - cv) * (v - cv)).sqrt();
                    out.extend(sample(vp.vmin, vp.vmax, vp.samples, uband, f, true));
                }
            } else {
                for sgn in [-1.0, 1.0] {
                    let f = move |u: f64| cv + sgn * ((u - cu) * (u - cu) - r2).sqrt();
                    out.extend(sample(vp.umin, vp.umax, vp.samples, vband, f, false));
                }
            }
            Ok(out)
        }
    }
}

/// Stroke style of one drawn cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct Style {
    pub colour: String,
    pub dashed: bool,
    pub class: String,
}

impl Style {
    pub fn for_generation(gen: i32) -> Style {
        let colour = if gen < 0 {
            AXIS_COLOUR
        } else {
            PALETTE[gen as usize % PALETTE.len()]
        };
        Style {
            colour: colour.into(),
            dashed: false,
            class: format!("gen{gen}"),
        }
    }
}

/// Fixed-precision number with trailing zeros removed.
fn num(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" || s.is_empty() {
        "0".into()
    } else {
        s.into()
    }
}

struct Doc {
    w: XmlWriter,
    vp: Viewport,
}

impl Doc {
    fn new(vp: &Viewport) -> Doc {
        let mut w = XmlWriter::new(Options::default());
        w.write_declaration();
        w.start_element("svg");
        w.write_attribute("xmlns", "http://www.w3.org/2000/svg");
        w.write_attribute("version", "1.1");
        w.write_attribute("width", &num(vp.width));
        w.write_attribute("height", &num(vp.height()));
        w.write_attribute("viewBox", &format!("0 0 {} {}", num(vp.width), num(vp.height())));
        let mut d = Doc { w, vp: vp.clone() };
        d.axes();
        d
    }

    fn axes(&mut self) {
        self.w.start_element("g");
        self.w.write_attribute("id", "axes");
        self.w.write_attribute("stroke", AXIS_COLOUR);
        self.w.write_attribute("stroke-width", "1");
        for (a, b, c) in [(0.0, 1.0, 0.0), (1.0, 0.0, 0.0)] {
            if let Some(s) = clip_line(a, b, c, &self.vp) {
                self.shape(&s, None);
            }
        }
        self.w.end_element();
    }

    fn group(&mut self, id: &str) {
        self.w.start_element("g");
        self.w.write_attribute("id", id);
        self.w.write_attribute("fill", "none");
        self.w.write_attribute("stroke-width", &num(STROKE_WIDTH));
    }

    fn shape(&mut self, s: &Shape, style: Option<&Style>) {
        let vp = self.vp.clone();
        let w = &mut self.w;
        let px = |u: f64, v: f64| vp.to_px(u, v);
        match s {
            Shape::Circle { cu, cv, r } | Shape::Imaginary { cu, cv, r } => {
                let (x, y) = px(*cu, *cv);
                w.start_element("circle");
                w.write_attribute("cx", &num(x));
                w.write_attribute("cy", &num(y));
                w.write_attribute("r", &num(r * vp.scale()));
            }
            Shape::Segment { from, to } => {
                let (x1, y1) = px(from.0, from.1);
                let (x2, y2) = px(to.0, to.1);
                w.start_element("line");
                w.write_attribute("x1", &num(x1));
                w.write_attribute("y1", &num(y1));
                w.write_attribute("x2", &num(x2));
                w.write_attribute("y2", &num(y2));
            }
            Shape::Polyline(pts) => {
                let text: Vec<String> = pts
                    .iter()
                    .map(|&(u, v)| {
                        let (x, y) = px(u, v);
                        format!("{},{}", num(x), num(y))
                    })
                    .collect();
                w.start_element("polyline");
                w.write_attribute("points", &text.join(" "));
            }
            Shape::Dot { u, v } => {
                let (x, y) = px(*u, *v);
                w.start_element("circle");
                w.write_attribute("cx", &num(x));
                w.write_attribute("cy", &num(y));
                w.write_attribute("r", &num(DOT_RADIUS));
            }
        }
        if let Some(st) = style {
            let mut class = st.class.clone();
            if let Shape::Dot { .. } = s {
                w.write_attribute("fill", &st.colour);
                class.push_str(" point");
            }
            w.write_attribute("stroke", &st.colour);
            if st.dashed {
                w.write_attribute("stroke-dasharray", "6,4");
            }
            if let Shape::Imaginary { .. } = s {
                w.write_attribute("stroke-dasharray", "2,4");
                class.push_str(" imaginary");
            }
            w.write_attribute("class", &class);
        }
        w.end_element();
    }

    fn label(&mut self, text: &str, u: f64, v: f64) {
        let (x, y) = self.vp.to_px(u, v);
        self.w.start_element("text");
        self.w.write_attribute("x", &num(x + 4.0));
        self.w.write_attribute("y", &num(y - 4.0));
        self.w.write_text(text);
        self.w.end_element();
    }

    fn finish(self) -> String {
        let mut s = self.w.end_document();
        s.push('\n');
        s
    }
}

/// Anchor point for a label: the dot, circle top or first sample.
fn anchor(shapes: &[Shape]) -> Option<(f64, f64)> {
    shapes.first().map(|s| match s {
        Shape::Circle { cu, cv, r } | Shape::Imaginary { cu, cv, r } => (*cu, cv + r),
        Shape::Segment { from, to } => ((from.0 + to.0) / 2.0, (from.1 + to.1) / 2.0),
        Shape::Polyline(p) => p[p.len() / 2],
        Shape::Dot { u, v } => (*u, *v),
    })
}

/// A single cycle as SVG element text.
pub fn render_cycle(c: &Cycle, tau: i8, vp: &Viewport, style: &Style) -> Result<String> {
    let mut w = Doc {
        w: XmlWriter::new(Options::default()),
        vp: vp.clone(),
    };
    for s in cycle_shapes(c, tau, vp)? {
        w.shape(&s, Some(style));
    }
    Ok(w.w.end_document())
}

fn figure_tau(fig: &Figure) -> Result<i8> {
    fig.metric()
        .tau()
        .ok_or_else(|| Error::DimensionMismatch("only 2D figures are drawn".into()))
}

/// Every instance of every evaluated node, styled by generation.
/// Parametric and unsolved nodes are listed in a `warnings` group.
pub fn render_figure(fig: &Figure, vp: &Viewport) -> Result<String> {
    render_nodes(fig, vp, None)
}

/// As [`render_figure`], restricted to the labels in `only` if given.
pub fn render_nodes(fig: &Figure, vp: &Viewport, only: Option<&[&str]>) -> Result<String> {
    let tau = figure_tau(fig)?;
    let mut doc = Doc::new(vp);
    let mut skipped = vec![];
    let mut labels = vec![];
    doc.group("cycles");
    for node in fig.nodes() {
        if node.label == REAL_LINE || node.label == INFINITY {
            continue;
        }
        if only.is_some_and(|o| !o.contains(&node.label.as_str())) {
            continue;
        }
        if node.status != NodeStatus::Solved {
            skipped.push(format!("{} ({:?})", node.label, node.status));
            continue;
        }
        let style = Style::for_generation(node.generation);
        for inst in &node.instances {
            let shapes = cycle_shapes(&inst.cycle, tau, vp)?;
            for s in &shapes {
                doc.shape(s, Some(&style));
            }
            if let Some(a) = anchor(&shapes) {
                labels.push((node.label.clone(), a));
            }
        }
    }
    doc.w.end_element();
    if vp.labels && !labels.is_empty() {
        doc.w.start_element("g");
        doc.w.write_attribute("id", "labels");
        doc.w.write_attribute("font-family", "sans-serif");
        doc.w.write_attribute("font-size", "12");
        for (t, (u, v)) in &labels {
            doc.label(t, *u, *v);
        }
        doc.w.end_element();
    }
    if !skipped.is_empty() {
        doc.w.start_element("g");
        doc.w.write_attribute("id", "warnings");
        for s in &skipped {
            doc.w.start_element("desc");
            doc.w.write_text(&format!("not drawn: {s}"));
            doc.w.end_element();
        }
        doc.w.end_element();
    }
    Ok(doc.finish())
}

/// Horocycles (two per step), connecting cycles and, for the 45 degree
/// arrangement, the dashed mirror images of the connecting cycles.
pub fn render_chain(chain: &HorocycleChain, vp: &Viewport) -> Result<String> {
    let mut doc = Doc::new(vp);
    doc.group("horocycles");
    let horo = Style {
        colour: PALETTE[0].into(),
        dashed: false,
        class: "horocycle".into(),
    };
    for st in &chain.steps {
        for c in [&st.first, &st.second] {
            for s in cycle_shapes(c, -1, vp)? {
                doc.shape(&s, Some(&horo));
            }
        }
    }
    doc.w.end_element();
    doc.group("connecting");
    let conn = Style {
        colour: PALETTE[1].into(),
        dashed: false,
        class: "connecting".into(),
    };
    let mirror = Style {
        dashed: true,
        class: "connecting mirror".into(),
        ..conn.clone()
    };
    for st in &chain.steps {
        for s in cycle_shapes(&st.connecting, -1, vp)? {
            doc.shape(&s, Some(&conn));
        }
        if chain.arrangement == Arrangement::Ortho45 {
            for s in cycle_shapes(&st.connecting.mirror(), -1, vp)? {
                doc.shape(&s, Some(&mirror));
            }
        }
    }
    doc.w.end_element();
    Ok(doc.finish())
}

/// Viewport around the first horocycles of a chain.
pub fn chain_viewport(chain: &HorocycleChain, width: f64) -> Result<Viewport> {
    let e = Metric::elliptic();
    let mut boxes = vec![];
    for c in chain.horocycles().iter().take(4) {
        if let Ok((cen, r2)) = c.center_radius(&e) {
            let (u, v, r) = (cen[0].to_f64(), cen[1].to_f64(), r2.to_f64().max(0.0).sqrt());
            boxes.push((u - r, u + r, (v - r).min(-0.1 * r), v + r));
        }
    }
    Viewport::fit(&boxes, 0.1, width)
}

/// Viewport around all finite solved instances of a figure.
pub fn figure_viewport(fig: &Figure, width: f64) -> Result<Viewport> {
    let metric = fig.metric();
    let mut boxes = vec![];
    for node in fig.nodes() {
        if node.label == REAL_LINE || node.label == INFINITY || node.status != NodeStatus::Solved {
            continue;
        }
        for inst in &node.instances {
            if let Ok((c, r2)) = inst.cycle.center_radius(metric) {
                let (u, v) = (c[0].to_f64(), c[1].to_f64());
                let r = r2.to_f64().abs().sqrt();
                boxes.push((u - r, u + r, v - r, v + r));
            }
        }
    }
    Viewport::fit(&boxes, 0.15, width)
}
