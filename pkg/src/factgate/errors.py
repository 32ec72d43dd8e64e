"""Exception hierarchy.  Everything raised on purpose derives from FactgateError."""


class FactgateError(Exception):
    pass


# dataset
class MalformedRow(FactgateError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class EmptyDataset(FactgateError):
    pass


class MissingCut(FactgateError):
    def __init__(self, doc_id: str):
        super().__init__(f"record {doc_id!r} has no cut value")
        self.doc_id = doc_id


# backend
class BackendError(FactgateError):
    """Base for backend failures; scoring re-raises with pair context attached."""


class AuthError(BackendError):
    pass


class RateLimited(BackendError):
    def __init__(self, retry_after: float | None = None, message: str = "rate limited"):
        super().__init__(f"{message} (retry_after={retry_after})")
        self.retry_after = retry_after


class TransportError(BackendError):
    pass


class UnparseableResponse(BackendError):
    def __init__(self, excerpt: str, reason: str = "unparseable response"):
        super().__init__(f"{reason}: {excerpt[:200]!r}")
        self.excerpt = excerpt[:200]


class NoDecisionToken(BackendError):
    pass


class EmptyText(FactgateError, ValueError):
    pass


# facts
class NoFactsParsed(FactgateError):
    pass


class MalformedLine(FactgateError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class DuplicateDocId(FactgateError):
    def __init__(self, doc_id: str):
        super().__init__(f"duplicate doc_id {doc_id!r}")
        self.doc_id = doc_id


class UnknownDocId(FactgateError):
    pass


# scoring / classifier / analysis
class IndexOutOfRange(FactgateError, IndexError):
    pass


class EmptyTraining(FactgateError):
    pass


class SingleClassTraining(FactgateError):
    pass


class DegenerateVariance(FactgateError):
    pass


class NoFacts(FactgateError):
    pass


class OneClassOnly(FactgateError):
    pass


class InsufficientData(FactgateError):
    pass
