"""Exception hierarchy shared across the engine.

Two branches matter for the CLI exit-code contract: ``ValidationError``
(bad input content, exit code 1) and ``DataFileError`` (unreadable or
inconsistent files on disk, exit code 2).
"""


class FaqMatchError(Exception):
    """Base class for all engine errors."""


class ValidationError(FaqMatchError):
    """Input content violates a contract (CLI exit code 1)."""


class DataFileError(FaqMatchError):
    """A file could not be read or is internally inconsistent (CLI exit code 2)."""


# --- text / corpus ---------------------------------------------------------

class EmptyCorpus(ValidationError):
    pass


# --- knowledge base --------------------------------------------------------

class DuplicateId(ValidationError):
    def __init__(self, record_id: str):
        super().__init__(f"duplicate record id: {record_id!r}")
        self.record_id = record_id


class EmptyQuestion(ValidationError):
    def __init__(self, record_id: str):
        super().__init__(f"record {record_id!r} has an empty question")
        self.record_id = record_id


class EmptyAnswer(ValidationError):
    def __init__(self, record_id: str):
        super().__init__(f"record {record_id!r} has an empty answer")
        self.record_id = record_id


class CorruptFile(DataFileError):
    pass


class VersionMismatch(DataFileError):
    pass


# --- encoder ---------------------------------------------------------------

class MalformedLine(DataFileError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no


class DimensionMismatch(DataFileError):
    pass


# --- similarity / losses ---------------------------------------------------

class EmptyQuery(ValidationError):
    pass


class EmptyCandidate(ValidationError):
    pass


class ScoreOutOfRange(ValidationError):
    pass


class NonFiniteLoss(ValidationError):
    def __init__(self, pair_index: int):
        super().__init__(f"non-finite loss at pair {pair_index}")
        self.pair_index = pair_index


# --- pipeline --------------------------------------------------------------

class EmptyKnowledgeBase(ValidationError):
    pass


class EmptyAnswerDoc(ValidationError):
    pass


# --- evaluation ------------------------------------------------------------

class EmptyReference(ValidationError):
    pass


class LineCountMismatch(ValidationError):
    pass
