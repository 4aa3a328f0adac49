//! Query parsing: reaction SMARTS strings, systematic-name tokenization and
//! the combined text/structure query.

mod iupac;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::molgraph::{parse_smiles, SmilesError};

pub use iupac::{tokenize_iupac, FragmentVocabulary};

pub const DEFAULT_K: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReactionRole {
    Reactants,
    Agents,
    Products,
}

impl fmt::Display for ReactionRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReactionRole::Reactants => "reactants",
            ReactionRole::Agents => "agents",
            ReactionRole::Products => "products",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("query has no text, SMILES or reaction")]
    EmptyQuery,
    #[error("reaction SMARTS needs exactly two '>' separators, found {found}")]
    WrongSeparatorCount { found: usize },
    #[error("{role} component {index} ('{component}') is not valid SMILES: {source}")]
    ComponentParseError {
        component: String,
        role: ReactionRole,
        index: usize,
        #[source]
        source: SmilesError,
    },
    #[error("SMILES {index} ('{component}') is invalid: {source}")]
    InvalidSmiles {
        component: String,
        index: usize,
        #[source]
        source: SmilesError,
    },
    #[error("result budget k must be at least 1")]
    InvalidK,
}

/// `reactants>agents>products`, each side a list of SMILES.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ReactionQuery {
    pub reactants: Vec<String>,
    pub agents: Vec<String>,
    pub products: Vec<String>,
}

impl ReactionQuery {
    /// All components in reactant, agent, product order.
    pub fn compounds(&self) -> impl Iterator<Item = &str> {
        self.reactants
            .iter()
            .chain(&self.agents)
            .chain(&self.products)
            .map(String::as_str)
    }

    pub fn compound_count(&self) -> usize {
        self.reactants.len() + self.agents.len() + self.products.len()
    }
}

impl fmt::Display for ReactionQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}>{}>{}",
            self.reactants.join("."),
            self.agents.join("."),
            self.products.join(".")
        )
    }
}

/// Splits a reaction SMARTS on exactly two `>` and each section on `.`,
/// validating every component as SMILES.
pub fn parse_reaction_smarts(s: &str) -> Result<ReactionQuery, QueryError> {
    let sections: Vec<&str> = s.trim().split('>').collect();
    if sections.len() != 3 {
        return Err(QueryError::WrongSeparatorCount {
            found: sections.len() - 1,
        });
    }
    let roles = [ReactionRole::Reactants, ReactionRole::Agents, ReactionRole::Products];
    let mut parsed: Vec<Vec<String>> = Vec::with_capacity(3);
    for (section, role) in sections.iter().zip(roles) {
        let mut compounds = Vec::new();
        if !section.trim().is_empty() {
            for (index, component) in section.split('.').enumerate() {
                let component = component.trim();
                parse_smiles(component).map_err(|source| QueryError::ComponentParseError {
                    component: component.to_string(),
                    role,
                    index,
                    source,
                })?;
                compounds.push(component.to_string());
            }
        }
        parsed.push(compounds);
    }
    let products = parsed.pop().unwrap_or_default();
    let agents = parsed.pop().unwrap_or_default();
    let reactants = parsed.pop().unwrap_or_default();
    Ok(ReactionQuery {
        reactants,
        agents,
        products,
    })
}

/// A combined query. At least one of the three parts is present.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultimodalQuery {
    pub text: Option<String>,
    pub smiles: Vec<String>,
    pub reaction: Option<ReactionQuery>,
    pub k: usize,
}

impl MultimodalQuery {
    pub fn text(text: &str) -> Self {
        MultimodalQuery {
            text: Some(text.to_string()),
            smiles: Vec::new(),
            reaction: None,
            k: DEFAULT_K,
        }
    }

    /// Structure part of the query: the listed SMILES followed by every
    /// reaction component.
    pub fn structure_queries(&self) -> Vec<&str> {
        self.smiles
            .iter()
            .map(String::as_str)
            .chain(self.reaction.iter().flat_map(|r| r.compounds()))
            .collect()
    }
}

fn present(s: Option<&str>) -> Option<&str> {
    s.map(str::trim).filter(|s| !s.is_empty())
}

/// Builds a query from optional raw fields, as received by the CLI or API.
/// `smiles_csv` is comma-separated; `k` defaults to 10.
pub fn parse_query(
    text: Option<&str>,
    smiles_csv: Option<&str>,
    reaction: Option<&str>,
    k: Option<usize>,
) -> Result<MultimodalQuery, QueryError> {
    let text = present(text);
    let smiles_csv = present(smiles_csv);
    let reaction = present(reaction);
    if text.is_none() && smiles_csv.is_none() && reaction.is_none() {
        return Err(QueryError::EmptyQuery);
    }
    let k = k.unwrap_or(DEFAULT_K);
    if k == 0 {
        return Err(QueryError::InvalidK);
    }
    let mut smiles = Vec::new();
    if let Some(csv) = smiles_csv {
        for (index, component) in csv.split(',').map(str::trim).enumerate() {
            if component.is_empty() {
                continue;
            }
            parse_smiles(component).map_err(|source| QueryError::InvalidSmiles {
                component: component.to_string(),
                index,
                source,
            })?;
            smiles.push(component.to_string());
        }
    }
    let reaction = reaction.map(parse_reaction_smarts).transpose()?;
    Ok(MultimodalQuery {
        text: text.map(str::to_string),
        smiles,
        reaction,
        k,
    })
}
