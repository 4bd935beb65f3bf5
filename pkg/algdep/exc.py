"""Exceptions."""

import logging

logger = logging.getLogger(__name__)


def _join(**fields):
    msg = [f"{name}={value!r}" for name, value in fields.items()]
    return ";\n".join(msg)


class AlgdepError(Exception):
    """Root of every error raised by algdep."""


class NotPrime(AlgdepError, ValueError):
    def __init__(self, p):
        self.p = p
        super().__init__(_join(p=p, error="characteristic is not prime"))


class TooLarge(AlgdepError, ValueError):
    def __init__(self, *, what, value, cap):
        self.what = what
        self.value = value
        self.cap = cap
        super().__init__(_join(what=what, value=value, cap=cap))


class DivisionByZero(AlgdepError, ZeroDivisionError):
    pass


class CharDividesOrder(AlgdepError, ValueError):
    def __init__(self, *, p, order):
        self.p = p
        self.order = order
        super().__init__(
            _join(p=p, order=order, error="characteristic divides order")
        )


class ArityMismatch(AlgdepError, ValueError):
    def __init__(self, *, expected, got, where=""):
        self.expected = expected
        self.got = got
        super().__init__(_join(expected=expected, got=got, where=where))


class FieldMismatch(AlgdepError, ValueError):
    def __init__(self, left, right):
        super().__init__(_join(left=str(left), right=str(right)))


class ResourceLimit(AlgdepError, RuntimeError):
    """A configured cap in ``config.Limits`` was exceeded."""

    def __init__(self, *, limit, requested, cap, gate=None):
        self.limit = limit
        self.requested = requested
        self.cap = cap
        self.gate = gate
        fields = dict(limit=limit, requested=requested, cap=cap)
        if gate is not None:
            fields["gate"] = gate
        super().__init__(_join(**fields))


class InstanceSyntaxError(AlgdepError, ValueError):
    def __init__(self, *, line, error):
        self.line = line
        super().__init__(_join(line=line, error=error))


class UndefinedGate(InstanceSyntaxError):
    def __init__(self, *, line, gate):
        self.gate = gate
        super().__init__(line=line, error=f"undefined gate {gate}")


class NegativeValuation(AlgdepError, ValueError):
    def __init__(self, valuation):
        self.valuation = valuation
        super().__init__(_join(valuation=valuation))


class ConstantCircuit(AlgdepError, ValueError):
    def __init__(self, name):
        self.name = name
        super().__init__(_join(circuit=name, error="circuit is constant"))


class NotPrincipalCase(AlgdepError, ValueError):
    def __init__(self, *, k, m):
        self.k = k
        self.m = m
        super().__init__(_join(trdeg=k, m=m, error="requires trdeg = m-1"))


class ThresholdViolation(AlgdepError, ValueError):
    def __init__(self, *, mode, qprime, required):
        self.mode = mode
        self.qprime = qprime
        self.required = required
        super().__init__(
            _join(mode=mode, qprime=qprime, required=f"> {required}")
        )


class PreconditionViolation(AlgdepError, ValueError):
    pass


class NotFound(AlgdepError, LookupError):
    def __init__(self, *, tried, reason):
        self.tried = tried
        super().__init__(_join(tried=tried, reason=reason))
