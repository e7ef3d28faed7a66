//! Channel representations and channel extensions.
//!
//! The Choi operator is the canonical representation. It is normalized with
//! the unit-trace maximally entangled state ψ₊ = (1/d) Σ_ij |ii⟩⟨jj|, so
//! `Tr J = 1` for a channel; multiply by `d_in` for the unnormalized
//! convention. Subsystem order is `(C′, out)` and `(C′, A, B)` for extensions.

mod extension;
mod random;
mod types;

pub use extension::{
    channel_convex_extension, complementary, dilation, eb_check, identity_with_constant, incoherent_extension, kraus_pointer_extension,
    marginal, pointer_extension, povm_from_instrument, process_alice, EbStatus, IncoherentParts, Party,
};
pub use random::{
    ginibre, haar_unitary, random_channel, random_extension, random_instrument, random_isometry, random_kraus,
    random_povm, random_pure_state, random_state, seeded_rng, SeededRng,
};
pub use types::{
    apply, choi_from_kraus, kraus_from_choi, stinespring_from_kraus, Channel, ChannelExtension, ExtensionOrigin,
    Instrument, KrausSet, StinespringIsometry, Subchannel,
};

#[cfg(test)]
mod tests;
