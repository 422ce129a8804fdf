from abc import ABC, abstractmethod


class BasePipeline(ABC):
    """
    Base class for all pipelines.

    A pipeline runs its stages in order and returns a result carrying the exit
    status. At minimum, a pipeline implements :meth:`run_pipeline`.
    """

    @abstractmethod
    def run_pipeline(self):
        """
        Run every stage.

        Returns
        -------
        PipelineResult
            Exit status and what was produced. Hard errors are reported through
            the exit code rather than raised.
        """
        pass

    def __call__(self):
        return self.run_pipeline()
