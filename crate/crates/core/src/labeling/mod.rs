//! Label generation: cluster-class association, the label discriminator,
//! class VAEs and the self-correction loop.

pub mod cca;
pub mod discriminator;
pub mod self_correct;
pub mod vae;

pub use cca::{associate, cluster_class_associate, mode, AssociationTrace, CcaOutcome, ClusteredSpace, LabelVector};
pub use discriminator::{label_discriminator, mismatch, Reward, DEFAULT_TAU};
pub use self_correct::{per_class_quota, self_correct, IterationRecord, SelfCorrectConfig, SelfCorrectOutcome};
pub use vae::{
    kl_standard_normal, reparameterize, sample_vae, sample_with_noise, train_vae, train_vae_on, train_vae_with,
    VaeConfig, VaeModel, VaeNet,
};
