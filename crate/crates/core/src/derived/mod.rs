//! Application protocols built on the transfer and commitment primitives:
//! coin flipping, secret exchange, contract signing, and the two-sided
//! comparison family (agreement, string verification, the millionaires'
//! problem).

mod coinflip;
mod contract;
mod millionaires;
mod secret_exchange;
mod tscp;

pub use coinflip::{
    recompute_general_coin, recompute_qrp_coin, run_coin_flip_general, run_coin_flip_qrp,
    CoinFlipGeneralA, CoinFlipGeneralB, CoinFlipQrpA, CoinFlipQrpB, CoinResult, COIN_FLIP_GENERAL_SPEC,
    COIN_FLIP_QRP_SPEC,
};
pub use contract::{
    run_contract_sign, ContractOutcome, ContractSignerA, ContractSignerB, CONTRACT_SIGN_SPEC,
};
pub use millionaires::{
    run_millionaires, MillionaireA, MillionaireB, MILLIONAIRES_SPEC,
};
pub use secret_exchange::{
    run_secret_exchange, ExchangeOutcome, SecretExchangeParty, SECRET_EXCHANGE_SPEC,
};
pub use tscp::{
    run_byzantine_agreement, run_string_verification, run_tscp, ComparisonInput, TscpA, TscpB,
    BYZANTINE_AGREEMENT_SPEC, STRING_VERIFICATION_SPEC, TSCP_SPEC, VERDICT_DIFFERENT,
    VERDICT_POSSIBLY_EQUAL,
};
