"""Finite-domain constraint store with propagation and labeling."""
from .store import (
    INT_MAX,
    INT_MIN,
    Domain,
    Fail,
    ForeignVariable,
    InvalidDomain,
    Mark,
    MarkOrderViolation,
    ResourceExceeded,
    SearchConfig,
    Store,
    VarId,
)
from .propagators import (
    AllDifferent,
    BoolAnd,
    BoolNot,
    BoolOr,
    DiffLe,
    Div,
    Element,
    Equal,
    Linear,
    Mult,
    NotEqual,
    OneOf,
    Reified,
    make_negation,
    make_relation,
    tdiv,
)


def LinearEq(terms, const):
    return Linear(terms, "==", const)


def LinearLe(terms, const):
    return Linear(terms, "<=", const)
