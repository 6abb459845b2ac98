use crate::error::{Error, Result};

/// A regression sample: paired design points and responses.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Dataset {
    /// Builds a dataset, rejecting empty or non-finite input and length
    /// mismatches.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::InvalidData("empty sample".into()));
        }
        if x.len() != y.len() {
            return Err(Error::InvalidData(format!(
                "{} design points but {} responses",
                x.len(),
                y.len()
            )));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite value".into()));
        }
        Ok(Dataset { x, y })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_input() {
        assert!(Dataset::new(vec![], vec![]).is_err());
        assert!(Dataset::new(vec![0.0], vec![1.0, 2.0]).is_err());
        assert!(Dataset::new(vec![f64::NAN], vec![1.0]).is_err());
        assert!(Dataset::new(vec![0.0], vec![f64::INFINITY]).is_err());
        assert!(Dataset::new(vec![0.0, 1.0], vec![1.0, 2.0]).is_ok());
    }
}
