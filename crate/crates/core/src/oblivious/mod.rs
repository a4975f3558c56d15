//! Oblivious-transfer protocols as party state machines: the square-root
//! transfer over a composite modulus, the graph-isomorphism transfer, the
//! discrete-log one-of-two transfer, its graph-based counterpart, the n-ary
//! secret sale, and the transfer composed from two one-of-two executions.

mod composed;
mod dlp;
mod graph_1of2;
mod graph_ot;
mod rabin;
mod secret_sale;

pub use composed::{
    rank_bits, run_composed_ot, ComposedOtOutcome, ComposedOtPair, ComposedReceiver,
    ComposedSender, COMPOSED_OT_SPEC,
};
pub use dlp::{
    run_dlp_1of2, DlpOtParams, DlpReceiver, DlpSender, DLP_1OF2_SPEC,
};
pub(crate) use dlp::{build_betas, mask_secrets, unmask_chosen};
pub use graph_1of2::{
    run_graph_1of2, Graph1of2Outcome, Graph1of2Receiver, Graph1of2Sender, PlantedPair,
    GRAPH_1OF2_SPEC,
};
pub use graph_ot::{
    run_graph_ot, GraphOtOutcome, GraphOtReceiver, GraphOtSender, GRAPH_OT_SPEC,
};
pub use rabin::{run_rabin, RabinOutcome, RabinReceiver, RabinSender, RABIN_SPEC};
pub use secret_sale::{
    generate_stock, run_secret_sale, SecretSaleOutcome, SecretSaleReceiver, SecretSaleSender,
    SECRET_SALE_SPEC,
};

use rand::RngCore;

use crate::bits::Bits;
use crate::graphs::{apply_perm, gen_rigid_graph, is_rigid, random_perm, Graph, GraphError, Permutation};
use crate::numtheory::BlumModulus;

/// A sender secret that is the factorization of a composite modulus.
/// Blum form is not required for the square-root transfer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OtSecretFactorization(pub BlumModulus);

/// A sender secret that is the isomorphism between two published graphs.
/// The first graph is rigid so "the" isomorphism is unambiguous.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OtSecretIsomorphism {
    g1: Graph,
    g2: Graph,
    iso: Permutation,
}

impl OtSecretIsomorphism {
    pub fn new(g1: Graph, g2: Graph, iso: Permutation) -> Result<Self, GraphError> {
        if apply_perm(&g1, &iso)? != g2 {
            return Err(GraphError::BadWitness);
        }
        if !is_rigid(&g1)? {
            return Err(GraphError::BadWitness);
        }
        Ok(OtSecretIsomorphism { g1, g2, iso })
    }

    /// Sample a rigid graph and a uniform relabeling of it.
    pub fn generate<R: RngCore>(n: usize, rng: &mut R) -> Result<Self, GraphError> {
        let g1 = gen_rigid_graph(n, 0.5, rng)?;
        let iso = random_perm(n, rng);
        let g2 = apply_perm(&g1, &iso)?;
        Ok(OtSecretIsomorphism { g1, g2, iso })
    }

    pub fn g1(&self) -> &Graph {
        &self.g1
    }

    pub fn g2(&self) -> &Graph {
        &self.g2
    }

    pub fn iso(&self) -> &Permutation {
        &self.iso
    }
}

/// The two equal-length binary-string secrets of a one-of-two transfer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoSecrets {
    s0: Bits,
    s1: Bits,
}

impl TwoSecrets {
    pub fn new(s0: Bits, s1: Bits) -> Result<Self, crate::bits::BitsError> {
        if s0.len() != s1.len() {
            return Err(crate::bits::BitsError::LengthMismatch(s0.len(), s1.len()));
        }
        Ok(TwoSecrets { s0, s1 })
    }

    pub fn random<R: RngCore>(k: usize, rng: &mut R) -> Self {
        TwoSecrets {
            s0: Bits::random(k, rng),
            s1: Bits::random(k, rng),
        }
    }

    pub fn get(&self, i: bool) -> &Bits {
        if i {
            &self.s1
        } else {
            &self.s0
        }
    }

    pub fn len(&self) -> usize {
        self.s0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s0.is_empty()
    }
}
