use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Sigmoid,
    Tanh,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    /// First derivative.
    #[inline]
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => {
                let s = 1.0 / (1.0 + (-z).exp());
                s * (1.0 - s)
            }
            Activation::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
            Activation::Identity => 1.0,
        }
    }

    /// Value and the first three derivatives at `z`.
    #[inline]
    pub fn derivatives(self, z: f64) -> [f64; 4] {
        match self {
            Activation::Relu => [z.max(0.0), self.derivative(z), 0.0, 0.0],
            Activation::Sigmoid => {
                let s = 1.0 / (1.0 + (-z).exp());
                let d1 = s * (1.0 - s);
                [s, d1, d1 * (1.0 - 2.0 * s), d1 * (1.0 - 6.0 * s + 6.0 * s * s)]
            }
            Activation::Tanh => {
                let t = z.tanh();
                let d1 = 1.0 - t * t;
                [t, d1, -2.0 * t * d1, d1 * (6.0 * t * t - 2.0)]
            }
            Activation::Identity => [z, 1.0, 0.0, 0.0],
        }
    }

    /// Whether second input derivatives through this activation are meaningful.
    pub fn is_smooth(self) -> bool {
        !matches!(self, Activation::Relu)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
            Activation::Identity => "identity",
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "relu" => Ok(Activation::Relu),
            "sigmoid" => Ok(Activation::Sigmoid),
            "tanh" => Ok(Activation::Tanh),
            "identity" | "none" | "linear" => Ok(Activation::Identity),
            other => Err(Error::Config(format!("unknown activation '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        for act in [Activation::Sigmoid, Activation::Tanh] {
            for &z in &[-2.3, -0.4, 0.0, 0.7, 1.9] {
                let d = act.derivatives(z);
                let dp = act.derivatives(z + h);
                let dm = act.derivatives(z - h);
                for k in 0..3 {
                    let fd = (dp[k] - dm[k]) / (2.0 * h);
                    assert!((fd - d[k + 1]).abs() < 1e-8, "{act} z={z} order {}", k + 1);
                }
                assert_eq!(d[0], act.apply(z));
                assert_eq!(d[1], act.derivative(z));
            }
        }
    }

    #[test]
    fn relu_pieces() {
        assert_eq!(Activation::Relu.apply(-3.0), 0.0);
        assert_eq!(Activation::Relu.apply(2.5), 2.5);
        assert_eq!(Activation::Relu.derivative(-1.0), 0.0);
        assert_eq!(Activation::Relu.derivative(1.0), 1.0);
    }

    #[test]
    fn parse_round_trip() {
        for act in [Activation::Relu, Activation::Sigmoid, Activation::Tanh, Activation::Identity] {
            assert_eq!(act.as_str().parse::<Activation>().unwrap(), act);
        }
        assert!("swish".parse::<Activation>().is_err());
    }
}
