use std::fmt::Write as _;
use std::path::Path;

use super::{SectionSet, SectionSource, Trajectory};
use crate::error::Result;
use crate::output::{float, Marker, ScatterPlot};

/// `t, q₁.., p₁.., H` per stored step.
pub fn write_trajectory_csv(path: impl AsRef<Path>, trajectory: &Trajectory) -> Result<()> {
    let n = trajectory.dim();
    let mut s = String::from("t");
    for i in 1..=n {
        let _ = write!(s, ",q{i}");
    }
    for i in 1..=n {
        let _ = write!(s, ",p{i}");
    }
    s.push_str(",energy\n");
    for i in 0..trajectory.len() {
        s.push_str(&float(trajectory.times[i]));
        for v in &trajectory.states[i] {
            s.push(',');
            s.push_str(&float(*v));
        }
        s.push(',');
        s.push_str(&float(trajectory.energies[i]));
        s.push('\n');
    }
    std::fs::write(path, s)?;
    Ok(())
}

/// `source, index, t, x, xdot` for every point of every set.
pub fn write_sections_csv(path: impl AsRef<Path>, sets: &[&SectionSet]) -> Result<()> {
    let mut s = String::from("source,index,t,x,xdot\n");
    for set in sets {
        for (i, pt) in set.points.iter().enumerate() {
            let _ = writeln!(
                s,
                "{},{i},{},{},{}",
                set.source.name(),
                float(pt.t),
                float(pt.x()),
                float(pt.xdot())
            );
        }
    }
    std::fs::write(path, s)?;
    Ok(())
}

/// Overlay of sections in the `(x, ẋ)` plane: integrated points as dots,
/// constructed points as open circles.
pub fn section_overlay_svg(title: &str, sets: &[&SectionSet]) -> String {
    let mut plot = ScatterPlot::new(title, "x", "dx/dt");
    for set in sets {
        let (color, marker) = match set.source {
            SectionSource::Integrated => ("black", Marker::Dot),
            SectionSource::Constructed => ("#d04010", Marker::Circle),
        };
        plot.add(set.source.name(), color, marker, set.xy().collect());
    }
    plot.to_svg()
}
