//! Protocol drivers. Each driver runs unchanged under exact enumeration or
//! Monte Carlo sampling; see [`Exec`].

mod bsa;
mod cnot;
mod ecp;
mod epp;
mod exec;
mod states;

use serde::{Deserialize, Serialize};

pub use bsa::{
    hbsa, hbsa_label, hbsa_with, swap, swap_exec, teleport, teleport_exec, teleport_with_channel,
    HbsaResult, TeleportInput,
};
pub use cnot::{cnot_reference, hyper_cnot, hyper_cnot_exec};
pub use ecp::{
    ecp_param_split, ecp_param_split_exec, ecp_qnd_iterative, ecp_qnd_iterative_exec,
    ecp_schmidt_linear, ecp_schmidt_linear_exec, ecp_timebin, ecp_timebin_exec,
    param_split_closed_form, qnd_iterative_closed_form, schmidt_linear_closed_form,
    timebin_closed_form, timebin_table, IterativeClosedForm,
};
pub use epp::{
    agree, case_ensemble, dof_fidelities, efficiency_closed_form, epp_efficiency, epp_iterate,
    epp_iterate_closed_form, epp_step1, epp_step1_exec, epp_step2, epp_step2_exec, purified,
    rotate_path_error, EppRound,
};
pub use exec::{branch_key, BranchCache, Exec, Path, ProtocolReport, ReportBranch, Verdict};
pub use states::{
    hyper_bell, mixed_hyper, pair_layout, path_bell, pol_bell, pol_label, product_pair, Bell,
    HyperBell, PartialParams, PolBasis, TimebinParams,
};

use crate::error::Result;
use crate::state::{Ensemble, PureState};

/// A fully specified protocol run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "protocol", rename_all = "kebab-case")]
pub enum Invocation {
    Hbsa {
        state: PureState,
    },
    Teleport {
        input: TeleportInput,
    },
    Swap,
    EcpParamSplit {
        params: PartialParams,
        allow_permutation: bool,
    },
    EcpSchmidtLinear {
        params: PartialParams,
    },
    EcpQndIterative {
        params: PartialParams,
        rounds: usize,
    },
    EcpTimebin {
        params: TimebinParams,
    },
    HyperEppStep1 {
        input: Ensemble,
    },
    HyperEppStep2 {
        pol_source: Ensemble,
        path_source: Ensemble,
    },
    HyperCnot {
        input: PureState,
    },
}

impl Invocation {
    pub fn name(&self) -> &'static str {
        match self {
            Invocation::Hbsa { .. } => "hbsa",
            Invocation::Teleport { .. } => "teleport",
            Invocation::Swap => "swap",
            Invocation::EcpParamSplit { .. } => "ecp-param-split",
            Invocation::EcpSchmidtLinear { .. } => "ecp-schmidt-linear",
            Invocation::EcpQndIterative { .. } => "ecp-qnd-iterative",
            Invocation::EcpTimebin { .. } => "ecp-timebin",
            Invocation::HyperEppStep1 { .. } => "hyper-epp-step1",
            Invocation::HyperEppStep2 { .. } => "hyper-epp-step2",
            Invocation::HyperCnot { .. } => "hyper-cnot",
        }
    }

    pub fn hbsa_label(label: HyperBell) -> Self {
        Invocation::Hbsa {
            state: hyper_bell(label, "A", "B", PolBasis::Linear),
        }
    }

    pub fn epp_step1(f1: f64, f2: f64) -> Result<Self> {
        Ok(Invocation::HyperEppStep1 {
            input: mixed_hyper(f1, f2, "A", "B")?,
        })
    }

    /// Step-2 inputs are the case-3 and case-4 outputs of an enumerated first step.
    pub fn epp_step2(f1: f64, f2: f64) -> Result<Self> {
        let r = epp_step1(&mixed_hyper(f1, f2, "A", "B")?)?;
        Ok(Invocation::HyperEppStep2 {
            pol_source: case_ensemble(&r, "case3")?,
            path_source: case_ensemble(&r, "case4")?,
        })
    }

    pub fn run(&self, exec: &mut Exec) -> Result<ProtocolReport> {
        match self {
            Invocation::Hbsa { state } => Ok(hbsa_with(exec, state)?.report),
            Invocation::Teleport { input } => teleport_exec(exec, input),
            Invocation::Swap => swap_exec(exec),
            Invocation::EcpParamSplit {
                params,
                allow_permutation,
            } => ecp_param_split_exec(exec, params, *allow_permutation),
            Invocation::EcpSchmidtLinear { params } => ecp_schmidt_linear_exec(exec, params),
            Invocation::EcpQndIterative { params, rounds } => {
                ecp_qnd_iterative_exec(exec, params, *rounds)
            }
            Invocation::EcpTimebin { params } => ecp_timebin_exec(exec, params),
            Invocation::HyperEppStep1 { input } => epp_step1_exec(exec, input),
            Invocation::HyperEppStep2 {
                pol_source,
                path_source,
            } => epp_step2_exec(exec, pol_source, path_source),
            Invocation::HyperCnot { input } => hyper_cnot_exec(exec, input),
        }
    }
}
