use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::flow::{FlowProcessor, SemanticError, SemanticErrorKind};
use crate::selector::{build_chains, FlowSelector};
use crate::Error;

/// Shipped P4 templates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TemplateId {
    #[default]
    #[serde(rename = "v1model_basic")]
    V1ModelBasic,
}

impl TemplateId {
    pub fn name(self) -> &'static str {
        match self {
            TemplateId::V1ModelBasic => "v1model_basic",
        }
    }

    pub fn from_name(name: &str) -> Option<TemplateId> {
        match name {
            "v1model_basic" => Some(TemplateId::V1ModelBasic),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodegenConfig {
    pub out_dir: Option<PathBuf>,
    /// Also produce `program.p4` with every include expanded.
    pub emit_combined: bool,
    pub indent: usize,
}

impl Default for CodegenConfig {
    fn default() -> Self {
        CodegenConfig {
            out_dir: None,
            emit_combined: true,
            indent: 4,
        }
    }
}

/// Selectors, their processors and the template: the unit of code
/// generation and simulation.
#[derive(Clone, Debug)]
pub struct Solution {
    selectors: Vec<FlowSelector>,
    template: TemplateId,
    options: CodegenConfig,
}

impl Solution {
    pub fn new(
        selectors: Vec<FlowSelector>,
        template: TemplateId,
        options: CodegenConfig,
    ) -> Result<Self, Error> {
        build_chains(&selectors)?;
        let mut by_name: HashMap<&str, &Arc<FlowProcessor>> = HashMap::new();
        for s in &selectors {
            let p = s.processor();
            p.validate_complete()?;
            if let Some(prev) = by_name.insert(p.name(), p) {
                if !Arc::ptr_eq(prev, p) && **prev != **p {
                    return Err(SemanticError {
                        kind: SemanticErrorKind::DuplicateName,
                        message: format!("two different processors are named `{}`", p.name()),
                        site: 0,
                    }
                    .into());
                }
            }
        }
        Ok(Solution {
            selectors,
            template,
            options,
        })
    }

    pub fn with_defaults(selectors: Vec<FlowSelector>) -> Result<Self, Error> {
        Solution::new(selectors, TemplateId::default(), CodegenConfig::default())
    }

    pub fn selectors(&self) -> &[FlowSelector] {
        &self.selectors
    }

    pub fn template(&self) -> TemplateId {
        self.template
    }

    pub fn options(&self) -> &CodegenConfig {
        &self.options
    }

    pub fn options_mut(&mut self) -> &mut CodegenConfig {
        &mut self.options
    }

    /// Distinct processors in order of first use.
    pub fn processors(&self) -> Vec<&Arc<FlowProcessor>> {
        let mut out: Vec<&Arc<FlowProcessor>> = Vec::new();
        for s in &self.selectors {
            if !out.iter().any(|p| p.name() == s.processor().name()) {
                out.push(s.processor());
            }
        }
        out
    }

    /// Selectors bound to the named processor, in registration order.
    pub fn selectors_of(&self, processor: &str) -> Vec<&FlowSelector> {
        self.selectors
            .iter()
            .filter(|s| s.processor().name() == processor)
            .collect()
    }
}
