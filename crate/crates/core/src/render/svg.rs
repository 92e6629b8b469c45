use std::fmt::Write;

use super::fmt_num;

/// Attribute value: numbers get the fixed two-decimal format.
pub(crate) enum Val<'a> {
    N(f64),
    S(&'a str),
    O(String),
}

impl Val<'_> {
    fn render(&self) -> String {
        match self {
            Val::N(x) => fmt_num(*x),
            Val::S(s) => escape(s),
            Val::O(s) => escape(s),
        }
    }
}

pub(crate) fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

pub(crate) struct Svg {
    out: String,
    depth: usize,
}

impl Svg {
    pub fn new(width: f64, height: f64) -> Self {
        let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        let (w, h) = (fmt_num(width), fmt_num(height));
        let _ = writeln!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0.00 0.00 {w} {h}\" font-family=\"sans-serif\">"
        );
        Self { out, depth: 1 }
    }

    fn indent(&mut self) {
        for _ in 0..self.depth {
            self.out.push_str("  ");
        }
    }

    fn attrs(&mut self, attrs: &[(&str, Val)]) {
        for (k, v) in attrs {
            let _ = write!(self.out, " {k}=\"{}\"", v.render());
        }
    }

    pub fn empty(&mut self, name: &str, attrs: &[(&str, Val)]) {
        self.indent();
        let _ = write!(self.out, "<{name}");
        self.attrs(attrs);
        self.out.push_str("/>\n");
    }

    pub fn text(&mut self, attrs: &[(&str, Val)], content: &str) {
        self.indent();
        self.out.push_str("<text");
        self.attrs(attrs);
        let _ = writeln!(self.out, ">{}</text>", escape(content));
    }

    pub fn open(&mut self, name: &str, attrs: &[(&str, Val)]) {
        self.indent();
        let _ = write!(self.out, "<{name}");
        self.attrs(attrs);
        self.out.push_str(">\n");
        self.depth += 1;
    }

    pub fn close(&mut self, name: &str) {
        self.depth -= 1;
        self.indent();
        let _ = writeln!(self.out, "</{name}>");
    }

    /// Element whose only content is text.
    pub fn leaf(&mut self, name: &str, content: &str) {
        self.indent();
        let _ = writeln!(self.out, "<{name}>{}</{name}>", escape(content));
    }

    pub fn group(&mut self, class: &str, dx: f64, dy: f64) {
        let transform = format!("translate({},{})", fmt_num(dx), fmt_num(dy));
        self.open("g", &[("class", Val::S(class)), ("transform", Val::O(transform))]);
    }

    pub fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

pub(crate) fn title(svg: &mut Svg, x: f64, y: f64, content: &str) {
    svg.text(
        &[("class", Val::S("title")), ("x", Val::N(x)), ("y", Val::N(y)), ("font-size", Val::N(13.0))],
        content,
    );
}

pub(crate) fn label(svg: &mut Svg, x: f64, y: f64, anchor: &str, size: f64, content: &str) {
    svg.text(
        &[
            ("x", Val::N(x)),
            ("y", Val::N(y)),
            ("font-size", Val::N(size)),
            ("text-anchor", Val::S(anchor)),
            ("fill", Val::S("#222222")),
        ],
        content,
    );
}

pub(crate) fn line(svg: &mut Svg, class: &str, (x1, y1): (f64, f64), (x2, y2): (f64, f64), stroke: &str, width: f64) {
    svg.empty(
        "line",
        &[
            ("class", Val::S(class)),
            ("x1", Val::N(x1)),
            ("y1", Val::N(y1)),
            ("x2", Val::N(x2)),
            ("y2", Val::N(y2)),
            ("stroke", Val::S(stroke)),
            ("stroke-width", Val::N(width)),
        ],
    );
}

/// Round legend swatch; circles keep legends out of rectangle counts.
pub(crate) fn swatch(svg: &mut Svg, x: f64, y: f64, fill: &str, text: &str) {
    svg.empty(
        "circle",
        &[
            ("class", Val::S("legend")),
            ("cx", Val::N(x)),
            ("cy", Val::N(y)),
            ("r", Val::N(5.0)),
            ("fill", Val::S(fill)),
            ("stroke", Val::S("#666666")),
            ("stroke-width", Val::N(0.5)),
        ],
    );
    label(svg, x + 9.0, y + 4.0, "start", 10.0, text);
}

pub(crate) fn no_data(svg: &mut Svg, x: f64, y: f64) {
    svg.text(
        &[("class", Val::S("no-data")), ("x", Val::N(x)), ("y", Val::N(y)), ("font-size", Val::N(12.0)), ("fill", Val::S("#666666"))],
        "no data",
    );
}
