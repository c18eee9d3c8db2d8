use std::fmt::Write;

use quick_xml::escape::escape;

use super::{CoverageReport, LocationReport};
use crate::span::TimeSpan;

pub const MIN_TIMELINE_WIDTH: u32 = 100;

const LANE_HEIGHT: u32 = 24;
const BAR_INSET: u32 = 4;
const AXIS_HEIGHT: u32 = 28;
const TICKS: u64 = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct LaneSpan {
    pub span: TimeSpan,
    pub title: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lane {
    pub label: String,
    pub spans: Vec<LaneSpan>,
}

/// Anything drawable as lanes of spans over a fixed duration.
pub trait Timeline {
    fn duration_ms(&self) -> u64;
    fn lanes(&self) -> Vec<Lane>;
}

/// One lane per network, holding the union of that network's spans.
impl Timeline for CoverageReport {
    fn duration_ms(&self) -> u64 {
        self.duration_ms
    }

    fn lanes(&self) -> Vec<Lane> {
        self.networks
            .iter()
            .map(|n| Lane {
                label: n.network_id.clone(),
                spans: n.spans.iter().map(|&span| LaneSpan { span, title: format!("{} {span}", n.network_id) }).collect(),
            })
            .collect()
    }
}

/// One lane per system, holding every location of each of its options.
impl Timeline for LocationReport {
    fn duration_ms(&self) -> u64 {
        self.duration_ms
    }

    fn lanes(&self) -> Vec<Lane> {
        let mut lanes: Vec<Lane> = Vec::new();
        for (code, locations) in &self.codes {
            let system = code.split_once(':').map_or(code.as_str(), |(s, _)| s);
            if lanes.last().is_none_or(|l| l.label != system) {
                lanes.push(Lane { label: system.to_string(), spans: Vec::new() });
            }
            let lane = lanes.last_mut().expect("lane pushed above");
            lane.spans.extend(locations.iter().map(|l| LaneSpan { span: l.span, title: format!("{code} {}", l.span) }));
        }
        for lane in &mut lanes {
            lane.spans.sort_by(|a, b| a.span.cmp(&b.span).then_with(|| a.title.cmp(&b.title)));
        }
        lanes
    }
}

fn clock(ms: u64) -> String {
    let secs = ms / 1000;
    format!("{}:{:02}", secs / 60, secs % 60)
}

/// Renders a timeline as an SVG 1.1 document. Widths under
/// [`MIN_TIMELINE_WIDTH`] are raised to it. The output depends only on the
/// input.
pub fn render_timeline_svg(report: &impl Timeline, width_px: u32) -> String {
    let width = width_px.max(MIN_TIMELINE_WIDTH);
    let duration = report.duration_ms().max(1);
    let lanes = report.lanes();
    let axis_y = LANE_HEIGHT * lanes.len() as u32;
    let height = axis_y + AXIS_HEIGHT;
    let x = |ms: u64| ms as f64 * f64::from(width) / duration as f64;

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    );
    for (i, lane) in lanes.iter().enumerate() {
        let top = LANE_HEIGHT * i as u32;
        let _ = writeln!(out, "  <g class=\"lane\" data-label=\"{}\">", escape(lane.label.as_str()));
        for s in &lane.spans {
            let left = x(s.span.start_ms());
            let _ = writeln!(
                out,
                "    <rect x=\"{left:.2}\" y=\"{}\" width=\"{:.2}\" height=\"{}\" fill=\"#4a7ab5\"><title>{}</title></rect>",
                top + BAR_INSET,
                x(s.span.end_ms()) - left,
                LANE_HEIGHT - 2 * BAR_INSET,
                escape(s.title.as_str())
            );
        }
        let _ = writeln!(
            out,
            "    <text x=\"2\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>",
            top + LANE_HEIGHT - BAR_INSET - 2,
            escape(lane.label.as_str())
        );
        out.push_str("  </g>\n");
    }
    out.push_str("  <g class=\"axis\">\n");
    let _ = writeln!(out, "    <line x1=\"0\" y1=\"{axis_y}\" x2=\"{width}\" y2=\"{axis_y}\" stroke=\"#000\"/>");
    for t in 0..=TICKS {
        let ms = duration * t / TICKS;
        let tx = x(ms);
        let _ = writeln!(out, "    <line x1=\"{tx:.2}\" y1=\"{axis_y}\" x2=\"{tx:.2}\" y2=\"{}\" stroke=\"#000\"/>", axis_y + 6);
        let anchor = match t {
            0 => "start",
            TICKS => "end",
            _ => "middle",
        };
        let _ = writeln!(
            out,
            "    <text x=\"{tx:.2}\" y=\"{}\" text-anchor=\"{anchor}\" font-family=\"sans-serif\" font-size=\"10\">{}</text>",
            axis_y + 18,
            clock(ms)
        );
    }
    out.push_str("  </g>\n</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::{coverage_report, NetworkCoverage};

    fn rects(svg: &str) -> usize {
        svg.matches("<rect").count()
    }

    #[test]
    fn empty_report_has_axis_only() {
        let report = coverage_report("o1", 60_000, &[]).unwrap();
        let svg = render_timeline_svg(&report, 800);
        assert_eq!(rects(&svg), 0);
        assert!(svg.contains("class=\"axis\""));
        assert!(crate::xml::parse(&svg).is_ok());
    }

    #[test]
    fn full_span_is_full_width() {
        let span = TimeSpan::new(0, 60_000).unwrap();
        let report = CoverageReport {
            occasion_id: "o1".into(),
            duration_ms: 60_000,
            covered_ms: 60_000,
            coverage_ratio: 1.0,
            spans: vec![span],
            networks: vec![NetworkCoverage { network_id: "dm".into(), covered_ms: 60_000, coverage_ratio: 1.0, spans: vec![span] }],
        };
        let svg = render_timeline_svg(&report, 640);
        assert_eq!(rects(&svg), 1);
        assert!(svg.contains("<rect x=\"0.00\" y=\"4\" width=\"640.00\""));
        assert_eq!(svg, render_timeline_svg(&report, 640));
        assert!(render_timeline_svg(&report, 10).contains("width=\"100\""));
    }
}
