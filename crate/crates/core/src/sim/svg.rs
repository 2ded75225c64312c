//! Static SVG plot of a planar run: obstacles, waypoint path, executed
//! trajectory and the robot footprint at every few steps.

use std::fmt::Write;

use nalgebra::DVector;

use crate::geometry::{transform_polytope, HalfspacePolytope};
use crate::sim::scenario::Scenario;
use crate::sim::trace::Trace;
use crate::{Error, Result};

const SIZE: f64 = 800.0;
const FOOTPRINT_EVERY: usize = 5;

fn polygon(poly: &HalfspacePolytope<f64>) -> Vec<DVector<f64>> {
    let mut verts = poly.vertices();
    if verts.is_empty() {
        return verts;
    }
    let c = verts.iter().fold(DVector::zeros(2), |a, v| a + v) / verts.len() as f64;
    verts.sort_by(|a, b| {
        let ta = (a[1] - c[1]).atan2(a[0] - c[0]);
        let tb = (b[1] - c[1]).atan2(b[0] - c[0]);
        ta.total_cmp(&tb)
    });
    verts
}

pub fn render_svg(scn: &Scenario, trace: &Trace) -> Result<String> {
    if scn.dim != 2 {
        return Err(Error::Validation("plots are only drawn for planar scenarios".into()));
    }
    let states: Vec<DVector<f64>> = trace.rows.iter().map(|r| DVector::from_column_slice(&r.state)).collect();
    let positions: Vec<DVector<f64>> = states.iter().map(|s| scn.model.position(s)).collect();
    let obstacles: Vec<_> = scn.obstacles.iter().map(polygon).collect();

    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in positions.iter().chain(&scn.waypoints).chain(obstacles.iter().flatten()) {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let pad = 1.0;
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]) + 2.0 * pad;
    let scale = SIZE / span;
    let map = |p: &DVector<f64>| ((p[0] - lo[0] + pad) * scale, SIZE - (p[1] - lo[1] + pad) * scale);
    let points = |ps: &[DVector<f64>]| {
        ps.iter()
            .map(|p| {
                let (x, y) = map(p);
                format!("{x:.2},{y:.2}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, "<title>{}</title>", scn.name);
    for poly in &obstacles {
        let _ = writeln!(s, r##"<polygon points="{}" fill="#888" stroke="#333"/>"##, points(poly));
    }
    let _ = writeln!(
        s,
        r##"<polyline points="{}" fill="none" stroke="#1a7f37" stroke-dasharray="6 4"/>"##,
        points(&scn.waypoints)
    );
    for (k, state) in states.iter().enumerate() {
        if k % FOOTPRINT_EVERY != 0 && k + 1 != states.len() {
            continue;
        }
        let pose = scn.model.pose_of(state);
        for part in scn.robot.parts() {
            let world = transform_polytope(part.poly(), &pose)?;
            let _ = writeln!(
                s,
                r##"<polygon points="{}" fill="#cfe2ff" fill-opacity="0.5" stroke="#0b5ed7" stroke-width="0.5"/>"##,
                points(&polygon(&world))
            );
        }
    }
    let _ = writeln!(
        s,
        r##"<polyline points="{}" fill="none" stroke="#d63384" stroke-width="2"/>"##,
        points(&positions)
    );
    s.push_str("</svg>\n");
    Ok(s)
}
