//! CSV export of solutions and coefficients.

use std::io::Write;

use crate::bspline::{FieldGrid, SplineField2D};
use crate::error::Result;

/// `x,y,u` rows in grid storage order.
pub fn write_grid_csv<W: Write>(grid: &FieldGrid, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y", "u"])?;
    for (x, y, u) in grid.points() {
        w.write_record([fmt(x), fmt(y), fmt(u)])?;
    }
    w.flush()?;
    Ok(())
}

/// `i,j,u_ij` rows, `j` fastest.
pub fn write_coefficients_csv<W: Write>(field: &SplineField2D, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["i", "j", "u_ij"])?;
    let ny = field.basis_y().basis_count();
    for (k, u) in field.coefficients().iter().enumerate() {
        w.write_record([(k / ny).to_string(), (k % ny).to_string(), fmt(*u)])?;
    }
    w.flush()?;
    Ok(())
}

/// Shortest decimal that round-trips to the same `f64`.
pub fn fmt(v: f64) -> String {
    format!("{v:?}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bspline::KnotVector;

    #[test]
    fn csv_layout() {
        let kv = KnotVector::open_uniform(0.0, 2.0, 2, 1).unwrap();
        let f = SplineField2D::new(kv.clone(), kv, (0..9).map(|k| k as f64 / 3.0).collect()).unwrap();
        let mut buf = Vec::new();
        write_coefficients_csv(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "i,j,u_ij");
        assert_eq!(lines[2], "0,1,0.3333333333333333");
        assert_eq!(lines.len(), 10);

        let mut buf = Vec::new();
        write_grid_csv(&f.sample_grid(2, 2).unwrap(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,y,u\n0.0,0.0,0.0\n0.0,2.0,"));
        let back: f64 = "0.3333333333333333".parse().unwrap();
        assert_eq!(back, 1.0 / 3.0);
    }
}
