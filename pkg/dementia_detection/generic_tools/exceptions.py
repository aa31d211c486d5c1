from typing import List, Optional


class DementiaDetectionError(Exception):
    """Base class of every error raised by the pipeline. exit_code is what the cli returns."""
    exit_code = 2


class ConfigError(DementiaDetectionError):
    exit_code = 1

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__("invalid value for '{}': {}".format(field, message))


class UsageError(DementiaDetectionError):
    exit_code = 1


class DataError(DementiaDetectionError):
    exit_code = 2


class ChatParseError(DataError):
    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__("line {}: {}".format(line_number, message))


class CorpusLoadError(DataError):
    def __init__(self, message: str, offenders: List[str]):
        self.offenders = list(offenders)
        super().__init__("{}: {}".format(message, ", ".join(self.offenders)))


class EmbeddingFormatError(DataError):
    def __init__(self, offset: int, message: str):
        self.offset = offset
        super().__init__("byte offset {}: {}".format(offset, message))


class AudioFeatureFormatError(DataError):
    pass


class LexiconFormatError(DataError):
    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__("line {}: {}".format(line_number, message))


class DatasetError(DataError):
    pass


class MissingChannelError(DataError):
    def __init__(self, message: str, record_ids: Optional[List[str]] = None):
        self.record_ids = list(record_ids) if record_ids is not None else []
        if self.record_ids:
            message = message + ": " + ", ".join(self.record_ids)
        super().__init__(message)


class NoTimestampsError(DataError):
    pass


class CheckpointFormatError(DataError):
    pass


class RocError(DataError):
    pass


class NumericalError(DementiaDetectionError):
    exit_code = 3


class NonFiniteLossError(NumericalError):
    def __init__(self, epoch: int, batch_index: int, loss: float):
        self.epoch = epoch
        self.batch_index = batch_index
        super().__init__("non finite loss {} at epoch {}, batch {}".format(loss, epoch, batch_index))


class ShapeError(NumericalError):
    pass


class StaleCacheError(NumericalError):
    pass
