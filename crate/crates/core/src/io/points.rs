//! Scaling-law observations: CSV with header `n_data,c_train,loss`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::scaling::ScalingPoint;

pub const POINTS_HEADER: [&str; 3] = ["n_data", "c_train", "loss"];

fn point_error(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Record {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Every value must be finite and strictly positive.
pub fn parse_scaling_points(text: &str, path: &Path) -> Result<Vec<ScalingPoint>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.iter().ne(POINTS_HEADER) {
        return Err(point_error(path, 1, format!("header must be `{}`", POINTS_HEADER.join(","))));
    }
    let mut points = Vec::new();
    for result in reader.records() {
        let row = result?;
        let line = row.position().map_or(0, |p| p.line());
        let p: ScalingPoint = row.deserialize(Some(&headers)).map_err(|e| point_error(path, line, e.to_string()))?;
        if ![p.n_data, p.c_train, p.loss].iter().all(|v| v.is_finite() && *v > 0.0) {
            return Err(point_error(path, line, "values must be finite and > 0"));
        }
        points.push(p);
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects() {
        let p = Path::new("p.csv");
        let ok = parse_scaling_points("n_data,c_train,loss\n10,100,0.5\n20, 200, 0.25\n", p).unwrap();
        assert_eq!(ok.len(), 2);
        assert_eq!(ok[1].c_train, 200.0);
        let err = parse_scaling_points("n_data,c_train,loss\n10,100,0.5\n20,0,0.25\n", p).unwrap_err();
        assert!(err.to_string().contains('3'), "{err}");
        assert!(parse_scaling_points("n,c,loss\n1,2,3\n", p).is_err());
    }
}
