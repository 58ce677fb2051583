#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Copyright (C) 2022 PolySC contributors.

This program is free software: you can redistribute it and/or modify
it under the terms of the GNU Affero General Public License as
published by the Free Software Foundation, either version 3 of the
License, or (at your option) any later version.

This program is distributed in the hope that it will be useful,
but WITHOUT ANY WARRANTY; without even the implied warranty of
MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE. See the
GNU Affero General Public License for more details.

You should have received a copy of the GNU Affero General Public License
along with this program. If not, see <https://www.gnu.org/licenses/>.

Name: Cell Evaluator
Author: PolySC contributors
Date Created: May 16, 2022
Last Modified: June 14, 2022
"""

import multiprocessing
import queue
import signal
import time
from multiprocessing.managers import ListProxy
from typing import List, Protocol, Sequence

from loguru import logger


class Job(Protocol):
    def evaluate(self) -> float:
        ...


class CellEvaluator(multiprocessing.Process):
    """worker process evaluating cell jobs until it receives a None sentinel"""

    def __init__(
        self,
        instance_number: int,
        processing_queue: multiprocessing.Queue,
        processed_cells: ListProxy,
    ) -> None:
        multiprocessing.Process.__init__(self)
        self.running = False
        self.instance_number = instance_number
        self.processing_queue = processing_queue
        self.processed_cells = processed_cells

    def run(self) -> None:
        signal.signal(signal.SIGTERM, self._stop)
        self.running = True
        logger.opt(colors=True).debug(
            f"Cell evaluator <blue>{self.name}</blue> initiating"
        )
        while self.running is True:
            try:
                try:
                    # get new job from queue
                    item = self.processing_queue.get(timeout=0.1)
                except queue.Empty:
                    continue

                # sentinel: no more jobs
                if item is None:
                    break

                cell_index, job = item
                self.processed_cells[cell_index] = job.evaluate()

            except (SystemExit, KeyboardInterrupt):
                break

            except Exception as error:
                logger.exception(error)
                break

        logger.opt(colors=True).debug(
            f"Cell evaluator <blue>{self.name}</blue> terminating"
        )

    def _stop(self, _signal_number, _frame) -> None:
        self.running = False


def evaluate_jobs(jobs: Sequence[Job], workers: int = 1) -> List[float]:
    """
    evaluate jobs inline or across worker processes

    results are stored by job index, so the output does not depend on
    the number of workers or on scheduling order

    :param jobs Sequence[Job]: self-contained jobs exposing evaluate()
    :param workers int: number of evaluator processes, 1 evaluates inline
    :rtype List[float]: one result per job, in job order
    """
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    if workers == 1 or len(jobs) <= 1:
        return [job.evaluate() for job in jobs]

    manager = multiprocessing.Manager()
    processing_queue = multiprocessing.Queue()
    processed_cells = manager.list([None] * len(jobs))
    processes = []

    try:
        for instance_number in range(min(workers, len(jobs))):
            process = CellEvaluator(instance_number, processing_queue, processed_cells)
            process.daemon = True
            process.start()
            processes.append(process)

        for cell_index, job in enumerate(jobs):
            processing_queue.put((cell_index, job))
        for _ in processes:
            processing_queue.put(None)

        # wait for the workers to drain the queue
        while any(process.is_alive() for process in processes):
            time.sleep(0.01)
            for process in processes:
                if not process.is_alive() and process.exitcode != 0:
                    raise RuntimeError("cell evaluator died unexpectedly")

        results = list(processed_cells)

    finally:
        for process in processes:
            if process.is_alive():
                process.terminate()
        for process in processes:
            process.join()
        processing_queue.close()
        manager.shutdown()

    # a worker that hit an exception logs it and exits cleanly
    if any(result is None for result in results):
        raise RuntimeError("cell evaluator died unexpectedly")
    return results
