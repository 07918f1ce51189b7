from __future__ import annotations

import pytest

from xattreval.types import AnswerType, Example, Passage


def make_passage(
    pid: str = "p1",
    text: str = "Some passage text.",
    language: str = "fi",
    rank: int = 1,
    **kwargs,
) -> Passage:
    return Passage(passage_id=pid, text=text, language=language, retrieval_rank=rank, **kwargs)


def make_example(
    eid: str = "e1",
    query: str = "What is the capital of Kenya?",
    language: str = "fi",
    answer: str = "Nairobi",
    gold: tuple[str, ...] = ("Nairobi",),
    answer_type: AnswerType = AnswerType.SHORT_SPAN,
    passages: tuple[Passage, ...] | None = None,
) -> Example:
    if passages is None:
        passages = (make_passage("p1", "Its capital is Nairobi.", language, 1),)
    return Example(
        example_id=eid,
        query=query,
        query_language=language,
        answer=answer,
        gold_answers=gold,
        answer_type=answer_type,
        passages=passages,
    )


@pytest.fixture
def example() -> Example:
    return make_example()


@pytest.fixture(scope="session")
def mock_server_url():
    from xattreval.mockserver import running_mock_server

    with running_mock_server() as url:
        yield url
