use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::Vector;

/// Governor output `(x^r_i, u^r_i)` for `i < N`, padded with zeros beyond.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTrajectory {
    /// `x^r_0 … x^r_N` (the last entry is the origin).
    pub states: Vec<Vector>,
    /// `u^r_0 … u^r_{N-1}`.
    pub inputs: Vec<Vector>,
}

impl ReferenceTrajectory {
    /// Identically zero reference.
    pub fn zero(state_dim: usize) -> Self {
        Self {
            states: vec![Vector::zeros(state_dim)],
            inputs: Vec::new(),
        }
    }

    pub fn horizon(&self) -> usize {
        self.inputs.len()
    }

    pub fn state_dim(&self) -> usize {
        self.states[0].len()
    }

    pub fn state_at(&self, t: usize) -> Vector {
        self.states
            .get(t)
            .cloned()
            .unwrap_or_else(|| Vector::zeros(self.state_dim()))
    }

    pub fn input_at(&self, t: usize, input_dim: usize) -> Vector {
        self.inputs.get(t).cloned().unwrap_or_else(|| Vector::zeros(input_dim))
    }

    /// Largest `‖u^r_i‖_∞`.
    pub fn max_input(&self) -> f64 {
        self.inputs.iter().map(crate::linalg::inf_norm).fold(0.0, f64::max)
    }

    /// Header `t,x0,…,u0,…`; the final row carries `x^r_N` with zero inputs.
    pub fn to_csv(&self, input_dim: usize) -> String {
        let d = self.state_dim();
        let mut s = String::from("t");
        for j in 0..d {
            let _ = write!(s, ",x{j}");
        }
        for j in 0..input_dim {
            let _ = write!(s, ",u{j}");
        }
        s.push('\n');
        for (t, x) in self.states.iter().enumerate() {
            let _ = write!(s, "{t}");
            for v in x.iter() {
                let _ = write!(s, ",{v}");
            }
            let u = self.input_at(t, input_dim);
            for v in u.iter() {
                let _ = write!(s, ",{v}");
            }
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty reference CSV".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        let d = cols.iter().filter(|c| c.starts_with('x')).count();
        let m = cols.iter().filter(|c| c.starts_with('u')).count();
        if cols.first() != Some(&"t") || d + m + 1 != cols.len() || d == 0 {
            return Err(Error::Parse(format!("unexpected reference header `{header}`")));
        }
        let mut states = Vec::new();
        let mut inputs = Vec::new();
        for (row, line) in lines.enumerate() {
            let vals = line
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad value `{v}` in row {row}"))))
                .collect::<Result<Vec<f64>>>()?;
            if vals.len() != cols.len() || vals[0] as usize != row {
                return Err(Error::Parse(format!("malformed reference row {row}")));
            }
            states.push(Vector::from_row_slice(&vals[1..=d]));
            inputs.push(Vector::from_row_slice(&vals[d + 1..]));
        }
        if states.is_empty() {
            return Err(Error::Parse("reference CSV has no rows".into()));
        }
        inputs.pop();
        Ok(Self { states, inputs })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn padding_and_csv_round_trip() {
        let r = ReferenceTrajectory {
            states: vec![
                Vector::from_row_slice(&[0.1, 0.2]),
                Vector::from_row_slice(&[0.05, -0.1]),
                Vector::zeros(2),
            ],
            inputs: vec![Vector::from_element(1, -0.3), Vector::from_element(1, 0.125)],
        };
        assert_eq!(r.horizon(), 2);
        assert_eq!(r.state_at(7), Vector::zeros(2));
        assert_eq!(r.input_at(2, 1), Vector::zeros(1));
        assert_eq!(r.max_input(), 0.3);
        assert_eq!(ReferenceTrajectory::from_csv(&r.to_csv(1)).unwrap(), r);
        let z = ReferenceTrajectory::zero(2);
        assert_eq!(z.horizon(), 0);
        assert_eq!(z.state_at(0), Vector::zeros(2));
    }
}
