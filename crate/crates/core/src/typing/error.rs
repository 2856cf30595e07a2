use std::fmt;

use serde::Serialize;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ErrorCode {
    #[serde(rename = "E-DUAL")]
    Dual,
    #[serde(rename = "E-SPLIT")]
    Split,
    #[serde(rename = "E-FORMULA")]
    Formula,
    #[serde(rename = "E-UPDATE")]
    Update,
    #[serde(rename = "E-WF")]
    Wf,
    #[serde(rename = "E-UNQUAL")]
    Unqual,
    #[serde(rename = "E-NOTSESSION")]
    NotSession,
    #[serde(rename = "E-MISMATCH")]
    Mismatch,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::Dual => "E-DUAL",
            ErrorCode::Split => "E-SPLIT",
            ErrorCode::Formula => "E-FORMULA",
            ErrorCode::Update => "E-UPDATE",
            ErrorCode::Wf => "E-WF",
            ErrorCode::Unqual => "E-UNQUAL",
            ErrorCode::NotSession => "E-NOTSESSION",
            ErrorCode::Mismatch => "E-MISMATCH",
        }
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A rejection. `at` is the subprocess being checked when the error was
/// found and `context` the part of the context still available there.
#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize)]
#[error("{code}: {message}")]
pub struct TypeError {
    pub code: ErrorCode,
    pub message: String,
    pub at: String,
    pub context: String,
}

impl TypeError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> TypeError {
        TypeError {
            code,
            message: message.into(),
            at: String::new(),
            context: String::new(),
        }
    }

    pub(crate) fn located(
        mut self,
        at: &impl fmt::Display,
        context: &impl fmt::Display,
    ) -> TypeError {
        if self.at.is_empty() {
            self.at = at.to_string();
            self.context = context.to_string();
        }
        self
    }
}
