use std::fmt;

/// The named failure modes. `Display` gives the stable kebab-case identifier used in
/// reports and on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    NotMultiplicativelyClosed,
    NotStarClosed,
    LinearlyDependentBasis,
    NoUnit,
    NotHomomorphism,
    NotStarMap,
    NotInjective,
    Degenerate,
    ActionNotHomomorphic,
    InnerProductNotSesquilinear,
    NotPositive,
    DegenerateInnerProduct,
    ActionsDoNotCommute,
    LeftActionNotAdjointable,
    ShapeMismatch,
    InnerProductIllDefined,
    NotASubmodule,
    NotWellDefined,
    TriangleIdentityFailure,
    AssociativityFailure,
    CoassociativityFailure,
    CounitFailure,
    StarFailure,
    NotBLinear,
    NotHermitian,
    CharacterizationMismatch,
    InnerProductEscapesEtaA,
    EtaNotFaithful,
    NotSurjective,
    NotIsometric,
    ImageMismatch,
    NotUnitary,
    NotAComoduleMap,
    NotAdjointable,
    LeibnizFailure,
    NotFlat,
    NotAFrame,
    InconsistentMultiplicities,
    FourierIsoNotBijective,
    CoproductMismatch,
    CounitMismatch,
    ParseError,
    UnresolvedReference,
    InvalidArgument,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        use Kind::*;
        match self {
            NotMultiplicativelyClosed => "not-multiplicatively-closed",
            NotStarClosed => "not-star-closed",
            LinearlyDependentBasis => "linearly-dependent-basis",
            NoUnit => "no-unit",
            NotHomomorphism => "not-homomorphism",
            NotStarMap => "not-star-map",
            NotInjective => "not-injective",
            Degenerate => "degenerate",
            ActionNotHomomorphic => "action-not-homomorphic",
            InnerProductNotSesquilinear => "inner-product-not-sesquilinear",
            NotPositive => "not-positive",
            DegenerateInnerProduct => "degenerate-inner-product",
            ActionsDoNotCommute => "actions-do-not-commute",
            LeftActionNotAdjointable => "left-action-not-adjointable",
            ShapeMismatch => "shape-mismatch",
            InnerProductIllDefined => "inner-product-ill-defined",
            NotASubmodule => "not-a-submodule",
            NotWellDefined => "not-well-defined",
            TriangleIdentityFailure => "triangle-identity-failure",
            AssociativityFailure => "associativity-failure",
            CoassociativityFailure => "coassociativity-failure",
            CounitFailure => "counit-failure",
            StarFailure => "star-failure",
            NotBLinear => "not-b-linear",
            NotHermitian => "not-hermitian",
            CharacterizationMismatch => "characterization-mismatch",
            InnerProductEscapesEtaA => "inner-product-escapes-eta(A)",
            EtaNotFaithful => "eta-not-faithful",
            NotSurjective => "not-surjective",
            NotIsometric => "not-isometric",
            ImageMismatch => "image-mismatch",
            NotUnitary => "not-unitary",
            NotAComoduleMap => "not-a-comodule-map",
            NotAdjointable => "not-adjointable",
            LeibnizFailure => "leibniz-failure",
            NotFlat => "not-flat",
            NotAFrame => "not-a-frame",
            InconsistentMultiplicities => "inconsistent-multiplicities",
            FourierIsoNotBijective => "fourier-iso-not-bijective",
            CoproductMismatch => "coproduct-mismatch",
            CounitMismatch => "counit-mismatch",
            ParseError => "parse-error",
            UnresolvedReference => "unresolved-reference",
            InvalidArgument => "invalid-argument",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, thiserror::Error)]
#[error("{kind}: {detail}")]
pub struct Error {
    pub kind: Kind,
    pub detail: String,
}

impl Error {
    pub fn new(kind: Kind, detail: impl Into<String>) -> Self {
        Error { kind, detail: detail.into() }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn shape(detail: impl Into<String>) -> Error {
    Error::new(Kind::ShapeMismatch, detail)
}
