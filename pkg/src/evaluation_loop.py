import sys

import numpy as np
from tqdm import tqdm

from src.evaluation.metrics import score_against_truth


class EvaluationLoop:
    """A simple ground-truth evaluation loop.
    This takes `Generator` and `Estimator` instances and coordinates their interaction.
    For every seed the generator produces a sample with known instantaneous frequency,
    the estimator produces its estimate, and the two are compared segment by segment.

    This can be used as:
        `loop = EvaluationLoop(generator, estimator)`
        `loop.run(seeds, K=20)`

    Attributes:
        generator (core.Generator): A generator of ground-truth samples.
        estimator (core.Estimator): An estimator of the instantaneous frequency.
        run_history (dict): A dictionary storing information containing:
            seeds (list(int)): The seeds that were run.
            e_k (list(float)): The segment median error of every seed in percent.
            e_k_signed (list(float)): The signed segment median error of every seed.
            n_empty (list(int)): The number of segments without valid samples.
        stdout (file): File object (stream) used for standard output of logging information.
    """

    def __init__(self, generator, estimator, stdout=sys.stdout):
        self.generator = generator
        self.estimator = estimator
        self.run_history = {}
        self.stdout = stdout

    def run(self, seeds, K=20, trim=0.1, log_every=None, progress=False):
        """Run the generator-estimator loop over `seeds`.

        Args:
            seeds (Iterable[int]): Seeds passed to the generator.
            K (int, optional): Number of segments of the error measure. Default value is 20.
            trim (float, optional): Fraction of the estimate dropped at both ends
                before scoring. Default value is 0.1.
            log_every (int, optional): Printout logging information every `log_every`
                seeds. If None, nothing is logged. Default value is None.
            progress (bool, optional): If True, display a progress bar. Default value
                is False.

        Returns:
            e_k (np.Array): The segment median error of every seed.
        """
        self.run_history = {
            "seeds": [],
            "e_k": [],
            "e_k_signed": [],
            "n_empty": [],
        }

        seeds = list(seeds)
        for i, seed in enumerate(tqdm(seeds, disable=not progress)):
            sample = self.generator.generate(seed)
            if_est = self.estimator.estimate(sample)
            report = score_against_truth(sample, if_est, K, trim)

            # Bookkeeping.
            self.run_history["seeds"].append(seed)
            self.run_history["e_k"].append(report.e_k)
            self.run_history["e_k_signed"].append(report.e_k_signed)
            self.run_history["n_empty"].append(report.n_empty)

            # Printout logging information.
            if log_every is not None and (i + 1) % log_every == 0:
                recent = self.run_history["e_k"][-log_every:]
                tqdm.write("Seed ({}/{}); Mean/Worst E_{}: {:.3f}%/{:.3f}%".format(
                    i + 1, len(seeds), K, np.mean(recent), np.max(recent)), file=self.stdout)

        return np.asarray(self.run_history["e_k"])
