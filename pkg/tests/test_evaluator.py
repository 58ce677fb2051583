#!/usr/bin/python
# -*- coding: utf-8 -*-

from dataclasses import dataclass

import pytest

from polysc.evaluator import evaluate_jobs


@dataclass(frozen=True)
class SquareJob:
    value: int

    def evaluate(self) -> float:
        return float(self.value * self.value)


@dataclass(frozen=True)
class FailingJob:
    def evaluate(self) -> float:
        raise ArithmeticError("cell exploded")


def test_results_keep_job_order():
    jobs = [SquareJob(value) for value in range(25)]
    expected = [float(value * value) for value in range(25)]
    assert evaluate_jobs(jobs, 1) == expected
    assert evaluate_jobs(jobs, 3) == expected


def test_worker_failure_is_reported():
    jobs = [SquareJob(1), FailingJob(), SquareJob(2)]
    with pytest.raises(RuntimeError):
        evaluate_jobs(jobs, 2)
    with pytest.raises(ArithmeticError):
        evaluate_jobs(jobs, 1)


def test_invalid_worker_count():
    with pytest.raises(ValueError):
        evaluate_jobs([SquareJob(1)], 0)
