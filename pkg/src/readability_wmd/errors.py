"""
Exception hierarchy for the readability pipeline
"""
from typing import Optional


class ReadabilityError(Exception):
    """Base class for every error raised by readability_wmd"""


class ConfigError(ReadabilityError, ValueError):
    """Invalid or missing run configuration"""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class CorpusFormatError(ReadabilityError, ValueError):
    """Malformed corpus file"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")


class DuplicateDocumentError(CorpusFormatError):
    """Two documents share an id"""

    def __init__(self, doc_id: str, line: Optional[int] = None):
        self.doc_id = doc_id
        super().__init__(f"duplicate document id {doc_id!r}", line)


class UnknownLevelError(CorpusFormatError):
    """Document level outside the declared level set"""

    def __init__(self, level: int, levels: list, line: Optional[int] = None):
        self.level = level
        super().__init__(f"level {level} not in declared levels {levels}", line)


class EmptyCorpusError(CorpusFormatError):
    """Corpus file yielded no documents"""


class AllTokensDropped(ReadabilityError, ValueError):
    """Every token of a document was out of vocabulary or a stopword"""

    def __init__(self, doc_id: str = ""):
        self.doc_id = doc_id
        super().__init__(f"AllTokensDropped: no in-vocabulary tokens in document {doc_id!r}")


class FoldError(ReadabilityError, ValueError):
    """Corpus cannot be split into the requested folds"""


class EmbeddingFormatError(ReadabilityError, ValueError):
    """Malformed .vec file"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")


class TokenIndexError(ReadabilityError, IndexError):
    """Token index outside the embedding table"""


class FeatureError(ReadabilityError, ValueError):
    """Feature extraction or scaling failure"""


class ClassifierError(ReadabilityError, ValueError):
    """Invalid classifier input"""


class ModelFormatError(ReadabilityError, ValueError):
    """Corrupt or truncated model file"""


class ModelVersionError(ModelFormatError):
    """Model file written by an unsupported format version"""


class SolverIterationError(ReadabilityError, RuntimeError):
    """Transport solver hit its pivot cap"""

    def __init__(self, cap: int):
        self.cap = cap
        super().__init__(f"transport solver exceeded iteration cap of {cap} pivots")


class PairwiseError(ReadabilityError, RuntimeError):
    """Failure while filling one cell of a pairwise distance matrix"""

    def __init__(self, target: int, candidate: int, cause: Exception):
        self.target = target
        self.candidate = candidate
        super().__init__(f"pair (target={target}, candidate={candidate}): {cause}")


class PhaseError(ReadabilityError, RuntimeError):
    """Failure inside one phase of label correction"""

    def __init__(self, phase: str, doc_id: str, cause: Exception):
        self.phase = phase
        self.doc_id = doc_id
        self.cause = cause
        super().__init__(f"{phase} phase failed for {doc_id!r}: {cause}")


class GroupPairError(ReadabilityError, RuntimeError):
    """Failure computing the distance of one document pair in a group experiment"""

    def __init__(self, group: str, index: int, pair: tuple, cause: Exception):
        self.group = group
        self.index = index
        self.pair = pair
        super().__init__(f"group {group} pair {index} {pair}: {cause}")


class FoldEvaluationError(ReadabilityError, RuntimeError):
    """Failure inside one cross-validation fold"""

    def __init__(self, fold: int, cause: Exception):
        self.fold = fold
        self.cause = cause
        super().__init__(f"fold {fold}: {cause}")
