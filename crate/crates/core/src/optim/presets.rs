use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{MethodKind, OptimizerSpec};
use crate::error::{Error, Result};

/// Deep-learning framework whose default hyperparameters a preset mirrors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Framework {
    Torch,
    Tensorflow,
    Dynet,
}

impl fmt::Display for Framework {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Framework::Torch => "torch",
            Framework::Tensorflow => "tensorflow",
            Framework::Dynet => "dynet",
        })
    }
}

impl FromStr for Framework {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "torch" | "pytorch" => Ok(Framework::Torch),
            "tensorflow" | "tf" => Ok(Framework::Tensorflow),
            "dynet" => Ok(Framework::Dynet),
            _ => Err(Error::Unknown {
                kind: "framework",
                value: s.to_string(),
            }),
        }
    }
}

/// Framework defaults for `method`.
///
/// Momentum for HB/NAG is 0.9 everywhere: DyNet ships it as the default and
/// the other two frameworks either default to zero (which is plain SGD) or
/// have no default. Step sizes are the framework defaults for the method
/// (0.001 for SGD/HB/NAG/Adam, 0.01 for AdaGrad/RMSProp). Adam's epsilon has
/// no framework-specific value and keeps 1e-8.
pub fn framework_preset(framework: Framework, method: MethodKind) -> Result<OptimizerSpec> {
    use Framework::*;
    use MethodKind::*;

    let base = OptimizerSpec::new(method, 1e-3);
    let spec = match (framework, method) {
        (_, Sgd) => base.with_beta(0.0).with_epsilon(0.0),
        (_, Hb) | (_, Nag) => base.with_beta(0.9).with_epsilon(0.0),
        (Torch, AdaGrad) => base.with_alpha(0.01).with_g_init(0.0).with_epsilon(1e-10),
        (Tensorflow, AdaGrad) => base.with_alpha(0.01).with_g_init(0.1).with_epsilon(0.0),
        (Dynet, AdaGrad) => base.with_alpha(0.01).with_g_init(0.0).with_epsilon(1e-20),
        (Torch, RmsProp) => base
            .with_alpha(0.01)
            .with_g_init(0.0)
            .with_beta2(0.99)
            .with_epsilon(1e-8),
        (Tensorflow, RmsProp) => base
            .with_alpha(0.01)
            .with_g_init(1.0)
            .with_beta2(0.9)
            .with_epsilon(1e-10),
        (Dynet, RmsProp) => {
            return Err(Error::UnsupportedPreset {
                framework: framework.to_string(),
                method: method.to_string(),
            })
        }
        (_, Adam) => base.with_beta1(0.9).with_beta2(0.999).with_epsilon(1e-8),
    };
    Ok(spec)
}
