//! Errors mapped to exit codes: 1 for domain failures, 2 for bad input.

use nonsig::decompose::DecomposeError;
use nonsig::inequality::InequalityError;
use nonsig::network::{NetworkError, ScenarioError};
use nonsig::quantum_oracle::QuantumError;
use nonsig::resource::ResourceError;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn domain(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

pub fn resource_is_domain(e: &ResourceError) -> bool {
    matches!(
        e,
        ResourceError::Signaling(_)
            | ResourceError::NotNormalized { .. }
            | ResourceError::Negative { .. }
    )
}

impl From<ResourceError> for Failure {
    fn from(e: ResourceError) -> Self {
        if resource_is_domain(&e) {
            Self::domain(e.to_string())
        } else {
            Self::input(e.to_string())
        }
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        if e.is_input_error() {
            Self::input(e.to_string())
        } else {
            Self::domain(e.to_string())
        }
    }
}

impl From<NetworkError> for Failure {
    fn from(e: NetworkError) -> Self {
        match e {
            NetworkError::SymbolOutOfRange { .. } | NetworkError::Arity { .. } => {
                Self::input(e.to_string())
            }
            NetworkError::Resource(r) => r.into(),
            _ => Self::domain(e.to_string()),
        }
    }
}

impl From<DecomposeError> for Failure {
    fn from(e: DecomposeError) -> Self {
        match e {
            DecomposeError::Resource(r) => r.into(),
            DecomposeError::Network(n) => n.into(),
            DecomposeError::SignatureMismatch
            | DecomposeError::EmptyVertexSet
            | DecomposeError::VertexSignature(_)
            | DecomposeError::DuplicateVertex(..) => Self::input(e.to_string()),
            _ => Self::domain(e.to_string()),
        }
    }
}

impl From<InequalityError> for Failure {
    fn from(e: InequalityError) -> Self {
        match e {
            InequalityError::Resource(r) => r.into(),
            InequalityError::Signaling(_) => Self::domain(e.to_string()),
            _ => Self::input(e.to_string()),
        }
    }
}

impl From<QuantumError> for Failure {
    fn from(e: QuantumError) -> Self {
        match e {
            QuantumError::Inequality(i) => i.into(),
            _ => Self::input(e.to_string()),
        }
    }
}
