//! Static SVG rendering of contours, slits and particle clouds.
//!
//! Output is a pure function of the input: coordinates are printed with six
//! decimals, elements appear in input order and the `y` axis points up.

use std::fmt::Write;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// Polyline through the points, closed back to the start when `closed`.
    Path { points: Vec<(f64, f64)>, closed: bool },
    /// One fixed-radius circle per point.
    Dots(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Style {
    /// Pixel width of the rendered image; the height follows the aspect ratio.
    pub width: f64,
    /// Stroke width in pixels.
    pub stroke_width: f64,
    /// Dot radius as a fraction of the larger extent of the view box.
    pub dot_radius: f64,
    /// Stroke colours, cycled over the shapes.
    pub palette: Vec<String>,
}

impl Default for Style {
    fn default() -> Self {
        Style {
            width: 600.0,
            stroke_width: 1.5,
            dot_radius: 0.004,
            palette: ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SvgError {
    #[error("non-finite coordinate in shape {0}")]
    NonFinite(usize),
}

const MARGIN: f64 = 0.05;

fn points(shape: &Shape) -> &[(f64, f64)] {
    match shape {
        Shape::Path { points, .. } | Shape::Dots(points) => points,
    }
}

fn num(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

/// Largest of 1, 2, 5 times a power of ten not exceeding `x`.
fn nice_length(x: f64) -> f64 {
    let p = 10f64.powf(x.log10().floor());
    [5.0, 2.0, 1.0]
        .into_iter()
        .map(|m| m * p)
        .find(|v| *v <= x)
        .unwrap_or(p)
}

pub fn render_svg(shapes: &[Shape], style: &Style) -> Result<String, SvgError> {
    for (i, s) in shapes.iter().enumerate() {
        if points(s).iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(SvgError::NonFinite(i));
        }
    }
    let all: Vec<(f64, f64)> = shapes.iter().flat_map(|s| points(s).iter().copied()).collect();
    let mut out = String::new();
    if all.is_empty() {
        out.push_str("<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"-1.000000 -1.000000 2.000000 2.000000\">\n");
        out.push_str("<!-- warning: nothing to draw -->\n</svg>\n");
        return Ok(out);
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in &all {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-9);
    let pad = MARGIN * span;
    let dot = style.dot_radius * span;
    // room below the drawing for the scale bar
    let bar_room = 0.08 * span;
    let (vx, vw) = (x0 - pad - dot, x1 - x0 + 2.0 * (pad + dot));
    let (vy, vh) = (-y1 - pad - dot, y1 - y0 + 2.0 * (pad + dot) + bar_room);
    let height = style.width * vh / vw;
    let stroke = style.stroke_width;

    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"{} {} {} {}\">",
        num(style.width),
        num(height),
        num(vx),
        num(vy),
        num(vw),
        num(vh)
    );
    let _ = writeln!(
        out,
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"white\"/>",
        num(vx),
        num(vy),
        num(vw),
        num(vh)
    );
    for (i, shape) in shapes.iter().enumerate() {
        let colour = if style.palette.is_empty() {
            "black"
        } else {
            &style.palette[i % style.palette.len()]
        };
        match shape {
            Shape::Path { points, closed } => {
                if points.is_empty() {
                    continue;
                }
                let mut d = String::new();
                for (j, (x, y)) in points.iter().enumerate() {
                    let _ = write!(d, "{}{} {}", if j == 0 { "M" } else { " L" }, num(*x), num(-*y));
                }
                if *closed {
                    d.push_str(" Z");
                }
                let _ = writeln!(
                    out,
                    "<path d=\"{d}\" fill=\"none\" stroke=\"{colour}\" stroke-width=\"{}\" vector-effect=\"non-scaling-stroke\"/>",
                    num(stroke)
                );
            }
            Shape::Dots(points) => {
                let _ = writeln!(out, "<g fill=\"{colour}\">");
                for (x, y) in points {
                    let _ = writeln!(
                        out,
                        "<circle cx=\"{}\" cy=\"{}\" r=\"{}\"/>",
                        num(*x),
                        num(-*y),
                        num(dot)
                    );
                }
                out.push_str("</g>\n");
            }
        }
    }
    let length = nice_length(0.25 * span);
    let bx = x0;
    let by = -y0 + pad + dot + 0.5 * bar_room;
    let _ = writeln!(
        out,
        "<path d=\"M{} {} L{} {}\" stroke=\"black\" stroke-width=\"{}\" vector-effect=\"non-scaling-stroke\"/>",
        num(bx),
        num(by),
        num(bx + length),
        num(by),
        num(stroke)
    );
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" font-size=\"{}\" font-family=\"sans-serif\">{}</text>",
        num(bx + length + 0.02 * span),
        num(by + 0.012 * span),
        num(0.035 * span),
        ryu::Buffer::new().format(length)
    );
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_is_four_segment_path() {
        let sq = Shape::Path {
            points: vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)],
            closed: true,
        };
        let svg = render_svg(&[sq], &Style::default()).unwrap();
        let path = svg.lines().find(|l| l.starts_with("<path d=\"M0.000000")).unwrap();
        let d = path.split('"').nth(1).unwrap();
        assert_eq!(d.matches('L').count(), 3);
        assert!(d.ends_with(" Z"));
        assert!(d.contains("L1.000000 -1.000000"));
    }

    #[test]
    fn deterministic() {
        let shapes = vec![
            Shape::Dots(vec![(0.1, 0.2), (-0.3, 0.5)]),
            Shape::Path {
                points: vec![(0.0, 0.0), (2.0, 1.0)],
                closed: false,
            },
        ];
        let a = render_svg(&shapes, &Style::default()).unwrap();
        let b = render_svg(&shapes, &Style::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gas_has_n_equal_circles() {
        let pts: Vec<(f64, f64)> = (0..37).map(|i| ((i as f64).cos(), (i as f64 * 0.7).sin())).collect();
        let svg = render_svg(&[Shape::Dots(pts)], &Style::default()).unwrap();
        let radii: Vec<&str> = svg
            .lines()
            .filter(|l| l.starts_with("<circle"))
            .map(|l| l.rsplit("r=\"").next().unwrap())
            .collect();
        assert_eq!(radii.len(), 37);
        assert!(radii.iter().all(|r| *r == radii[0]));
    }

    #[test]
    fn empty_input_is_valid_with_warning() {
        let svg = render_svg(&[], &Style::default()).unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("<!-- warning"));
        let svg = render_svg(&[Shape::Dots(vec![])], &Style::default()).unwrap();
        assert!(svg.contains("<!-- warning"));
    }

    #[test]
    fn rejects_non_finite() {
        let s = Shape::Dots(vec![(f64::NAN, 0.0)]);
        assert_eq!(render_svg(&[s], &Style::default()), Err(SvgError::NonFinite(0)));
    }

    #[test]
    fn scale_bar_lengths() {
        assert_eq!(nice_length(0.37), 0.2);
        assert_eq!(nice_length(7.0), 5.0);
        assert_eq!(nice_length(1.0), 1.0);
    }
}
