"""Exception hierarchy. Data problems (bad files, bad ids, impossible
requests) derive from DataError so the CLI can map them to exit code 2."""


class BiotabError(Exception):
    """Base class for all package errors."""


class DataError(BiotabError):
    """Problem with user-supplied data or identifiers."""


class MalformedRecord(DataError):
    def __init__(self, line_number: int, reason: str):
        super().__init__(f"line {line_number}: {reason}")
        self.line_number = line_number
        self.reason = reason


class DuplicateTableId(DataError):
    def __init__(self, table_id: str):
        super().__init__(f"duplicate table_id {table_id!r}")
        self.table_id = table_id


class NoTemplateMatch(DataError):
    def __init__(self, question: str):
        super().__init__(f"no template skeleton matches question: {question!r}")
        self.question = question


class EmptyResult(DataError):
    """No row of any table could host any requested template."""


class DegeneratePartition(DataError):
    """A table partition would leave the train or test side empty."""


class NoExemplarAvailable(DataError):
    def __init__(self, task_id: int, exclude_table_id: str | None = None):
        detail = f"task {task_id}"
        if exclude_table_id is not None:
            detail += f" (excluding table {exclude_table_id!r})"
        super().__init__(f"no exemplar available for {detail}")
        self.task_id = task_id
        self.exclude_table_id = exclude_table_id


class InvalidDonor(DataError):
    def __init__(self, task_id: int, donor_task_id: int):
        super().__init__(
            f"donor task {donor_task_id} is not a valid mismatch donor for task {task_id}"
        )
        self.task_id = task_id
        self.donor_task_id = donor_task_id


class ExemplarMismatch(DataError):
    """Exemplar does not belong to the task it was paired with."""


class UnknownInstanceId(DataError):
    def __init__(self, instance_id: str):
        super().__init__(f"prediction references unknown instance_id {instance_id!r}")
        self.instance_id = instance_id


class DuplicatePrediction(DataError):
    def __init__(self, instance_id: str):
        super().__init__(f"duplicate prediction for instance_id {instance_id!r}")
        self.instance_id = instance_id


class UnknownTaskId(DataError):
    def __init__(self, task_id: int):
        super().__init__(f"task_id {task_id} is not in 1..22")
        self.task_id = task_id
