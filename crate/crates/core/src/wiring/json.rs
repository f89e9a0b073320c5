use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{DecisionTree, Node};

/// On-disk node. Terminals carry their outcome label as a string, or no
/// label when the party's outcome is its full transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeFile {
    Internal {
        resource: String,
        input: u32,
        children: BTreeMap<String, NodeFile>,
    },
    Terminal {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        outcome: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeFile {
    pub party: String,
    pub settings: BTreeMap<String, NodeFile>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("bad symbol `{0}` in tree file")]
pub struct TreeFileError(pub String);

fn symbol(s: &str) -> Result<u32, TreeFileError> {
    s.trim().parse().map_err(|_| TreeFileError(s.to_string()))
}

impl NodeFile {
    fn from_node(n: &Node) -> Self {
        match n {
            Node::Terminal { outcome } => NodeFile::Terminal {
                outcome: outcome.map(|o| o.to_string()),
            },
            Node::Internal {
                resource,
                input,
                children,
            } => NodeFile::Internal {
                resource: resource.clone(),
                input: *input,
                children: children
                    .iter()
                    .map(|(o, c)| (o.to_string(), NodeFile::from_node(c)))
                    .collect(),
            },
        }
    }

    fn to_node(&self) -> Result<Node, TreeFileError> {
        Ok(match self {
            NodeFile::Terminal { outcome } => Node::Terminal {
                outcome: outcome.as_deref().map(symbol).transpose()?,
            },
            NodeFile::Internal {
                resource,
                input,
                children,
            } => Node::Internal {
                resource: resource.clone(),
                input: *input,
                children: children
                    .iter()
                    .map(|(o, c)| Ok((symbol(o)?, c.to_node()?)))
                    .collect::<Result<_, TreeFileError>>()?,
            },
        })
    }
}

impl TreeFile {
    pub fn from_tree(t: &DecisionTree) -> Self {
        Self {
            party: t.party().to_string(),
            settings: t
                .root()
                .iter()
                .map(|(s, n)| (s.to_string(), NodeFile::from_node(n)))
                .collect(),
        }
    }

    /// Structural conversion only; call [`DecisionTree::validate`] afterwards.
    pub fn to_tree(&self) -> Result<DecisionTree, TreeFileError> {
        let root = self
            .settings
            .iter()
            .map(|(s, n)| Ok((symbol(s)?, n.to_node()?)))
            .collect::<Result<_, TreeFileError>>()?;
        Ok(DecisionTree::new(self.party.clone(), root))
    }
}
