use std::fmt::Write;
use std::path::Path;

use crate::emit::write_file;
use crate::error::Result;
use crate::field::FieldFrame;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Palette {
    /// Blue-white-red, symmetric about zero.
    Diverging,
    /// Dark-to-bright ramp over `[min, max]`.
    Sequential,
}

impl Palette {
    pub fn for_frame(frame: &FieldFrame) -> Self {
        if frame.field.is_signed() {
            Palette::Diverging
        } else {
            Palette::Sequential
        }
    }

    fn stops(self) -> &'static [[u8; 3]] {
        match self {
            Palette::Diverging => &[[0x21, 0x66, 0xac], [0xf7, 0xf7, 0xf7], [0xb2, 0x18, 0x2b]],
            Palette::Sequential => {
                &[[0x44, 0x01, 0x54], [0x3b, 0x52, 0x8b], [0x21, 0x91, 0x8c], [0x5e, 0xc9, 0x62], [0xfd, 0xe7, 0x25]]
            }
        }
    }

    /// Colour at position `u` in `[0, 1]`.
    pub fn color(self, u: f64) -> String {
        let stops = self.stops();
        let u = if u.is_finite() { u.clamp(0.0, 1.0) } else { 0.5 };
        let x = u * (stops.len() - 1) as f64;
        let k = (x.floor() as usize).min(stops.len() - 2);
        let w = x - k as f64;
        let c: Vec<u8> = (0..3)
            .map(|i| (f64::from(stops[k][i]) * (1.0 - w) + f64::from(stops[k + 1][i]) * w).round() as u8)
            .collect();
        format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
    }
}

/// Value range mapped onto the palette.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scale {
    pub lo: f64,
    pub hi: f64,
}

impl Scale {
    pub fn for_frame(frame: &FieldFrame, palette: Palette) -> Self {
        let (min, max) = frame.unmasked().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !min.is_finite() {
            return Scale { lo: 0.0, hi: 0.0 };
        }
        match palette {
            Palette::Diverging => {
                let m = min.abs().max(max.abs());
                Scale { lo: -m, hi: m }
            }
            Palette::Sequential => Scale { lo: min, hi: max },
        }
    }

    /// Position in `[0, 1]`; a degenerate range maps to the middle.
    pub fn position(&self, v: f64) -> f64 {
        if self.hi > self.lo {
            (v - self.lo) / (self.hi - self.lo)
        } else {
            0.5
        }
    }
}

fn tick(v: f64) -> String {
    format!("{v:.3e}")
}

/// One rectangle per cell, hatched where masked, with a colour bar and a title.
pub fn render_svg(frame: &FieldFrame, palette: Palette) -> String {
    let (cols, rows) = (frame.cols(), frame.rows());
    let cell = (480 / cols.max(rows)).max(2);
    let (w, h) = (cols * cell, rows * cell);
    let (left, top) = (40, 40);
    let bar_x = left + w + 20;
    let width = bar_x + 90;
    let height = top + h + 40;
    let scale = Scale::for_frame(frame, palette);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    s.push_str(concat!(
        r#"<defs><pattern id="hatch" width="4" height="4" patternUnits="userSpaceOnUse" patternTransform="rotate(45)">"#,
        r##"<rect width="4" height="4" fill="#ffffff"/><line x1="0" y1="0" x2="0" y2="4" stroke="#999999" stroke-width="1.5"/>"##,
        "</pattern></defs>\n"
    ));
    let _ = writeln!(s, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{left}" y="24" font-family="sans-serif" font-size="14">{} at &#955;t = {}</text>"#,
        frame.field.name(),
        crate::emit::format_f64(frame.t)
    );
    let _ = writeln!(s, r#"<g id="cells" shape-rendering="crispEdges">"#);
    for j in 0..rows {
        // second axis increases upwards
        let y = top + (rows - 1 - j) * cell;
        for i in 0..cols {
            let x = left + i * cell;
            let fill = match frame.value(i, j) {
                Some(v) => palette.color(scale.position(v)),
                None => "url(#hatch)".to_string(),
            };
            let _ = writeln!(s, r#"<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{fill}"/>"#);
        }
    }
    s.push_str("</g>\n");
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
        left + w / 2,
        top + h + 28,
        frame.axes[0]
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" font-family="sans-serif" font-size="12" transform="rotate(-90 14 {})" text-anchor="middle">{}</text>"#,
        top + h / 2,
        top + h / 2,
        frame.axes[1]
    );

    let _ = writeln!(s, r#"<g id="colorbar">"#);
    let steps = 64;
    let seg = h as f64 / steps as f64;
    for k in 0..steps {
        let u = (k as f64 + 0.5) / steps as f64;
        let y = top as f64 + h as f64 - (k + 1) as f64 * seg;
        let _ = writeln!(
            s,
            r#"<rect x="{bar_x}" y="{y:.2}" width="16" height="{:.2}" fill="{}"/>"#,
            seg + 0.5,
            palette.color(u)
        );
    }
    let mut ticks = vec![(0.0, scale.lo), (1.0, scale.hi)];
    if scale.lo < 0.0 && scale.hi > 0.0 || scale.lo == 0.0 && scale.hi == 0.0 {
        ticks.push((scale.position(0.0), 0.0));
    }
    for (u, v) in ticks {
        let y = top as f64 + h as f64 * (1.0 - u);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.2}" font-family="sans-serif" font-size="10" dominant-baseline="middle">{}</text>"#,
            bar_x + 20,
            y,
            tick(v)
        );
    }
    s.push_str("</g>\n</svg>\n");
    s
}

pub fn write_svg(frame: &FieldFrame, path: &Path) -> Result<()> {
    write_file(path, render_svg(frame, Palette::for_frame(frame)).as_bytes())
}
