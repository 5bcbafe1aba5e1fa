class HarnessError(Exception):
    """Base class; maps to exit code 2 in the CLI."""


class MissingInstructionField(HarnessError):
    def __init__(self, path: str):
        super().__init__(f"in-mtm regime requires instruction fields; {path} lacks them")
        self.path = path


class AnswerSpanNotFound(HarnessError):
    def __init__(self, instance_id: str):
        super().__init__(f"answer text does not occur in the context of instance {instance_id!r}")
        self.instance_id = instance_id


class ArtifactIncompatible(HarnessError):
    pass


class EmptyTaskData(HarnessError):
    def __init__(self, task_id: int, path: str):
        super().__init__(f"dataset {path} holds no instances of task {task_id}")
        self.task_id = task_id
