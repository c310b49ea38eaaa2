//! Process-level error taxonomy: every failure is mapped onto one of four
//! exit codes and rendered as a single-line JSON object on stderr so that
//! calling scripts can branch on structured output.

use serde_json::{json, Value};
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
/// Unreadable, unparseable or semantically invalid inputs.
pub const EXIT_INPUT: i32 = 2;
/// The shape/pose optimizer (or model training) failed numerically.
pub const EXIT_INFERENCE: i32 = 3;
/// Demonstration extraction found no usable contact or proximity pairs.
pub const EXIT_EXTRACTION: i32 = 4;
/// Transfer of a recorded demonstration onto a new scene failed.
pub const EXIT_TRANSFER: i32 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{message}")]
    Inference {
        message: String,
        restart_losses: Vec<f64>,
    },
    #[error("{message}")]
    Extraction { message: String, diagnostics: Value },
    #[error("{message}")]
    Transfer { message: String },
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError::Input(message.into())
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Input(_) => "input",
            CliError::Inference { .. } => "inference",
            CliError::Extraction { .. } => "extraction",
            CliError::Transfer { .. } => "transfer",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Inference { .. } => EXIT_INFERENCE,
            CliError::Extraction { .. } => EXIT_EXTRACTION,
            CliError::Transfer { .. } => EXIT_TRANSFER,
        }
    }

    /// Machine-readable rendering written to stderr before exiting.
    pub fn to_json(&self) -> Value {
        let detail = match self {
            CliError::Input(_) => Value::Null,
            CliError::Inference { restart_losses, .. } => {
                json!({ "restart_losses": restart_losses })
            }
            CliError::Extraction { diagnostics, .. } => diagnostics.clone(),
            CliError::Transfer { .. } => Value::Null,
        };
        json!({
            "error": {
                "kind": self.kind(),
                "message": self.to_string(),
                "detail": detail,
            }
        })
    }
}

impl From<crate::io::FileFormatError> for CliError {
    fn from(e: crate::io::FileFormatError) -> Self {
        CliError::Input(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_contract() {
        assert_eq!(CliError::input("x").exit_code(), 2);
        let inf = CliError::Inference {
            message: "diverged".into(),
            restart_losses: vec![f64::INFINITY],
        };
        assert_eq!(inf.exit_code(), 3);
        let ext = CliError::Extraction {
            message: "no contacts".into(),
            diagnostics: json!({"min_distance_m": 0.4}),
        };
        assert_eq!(ext.exit_code(), 4);
        assert_eq!(
            CliError::Transfer {
                message: "degenerate".into()
            }
            .exit_code(),
            5
        );
    }

    #[test]
    fn json_rendering_carries_kind_and_detail() {
        let e = CliError::Inference {
            message: "all restarts diverged".into(),
            restart_losses: vec![1.0, 2.0],
        };
        let v = e.to_json();
        assert_eq!(v["error"]["kind"], "inference");
        assert_eq!(v["error"]["detail"]["restart_losses"][1], 2.0);
    }
}
