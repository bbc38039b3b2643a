import json
from pathlib import Path

import pytest

from minutemeta.corpus import load_corpus


SAMPLE_RECORDS = [
    {
        "doc_id": "alfa-001",
        "municipality": "Vila Alfa",
        "language": "pt",
        "text": (
            "Ata n.º 12/2021. Aos doze dias do mês de março de 2021, pelas 10:00 horas, "
            "reuniu em sessão ordinária a Câmara Municipal de Vila Alfa, no Salão Nobre, "
            "sob a presidência de Carlos Mota. Esteve presente a vereadora Ana Dias. "
            "Faltou o vereador Rui Prata. "
            "Foi discutido o orçamento para o próximo ano. "
            "A obra da escola foi aprovada por unanimidade. "
            "E nada mais havendo a tratar, foi encerrada a sessão pelas 12:30 horas."
        ),
        "entities": [
            {"kind": "meeting_number", "presence": "not_applicable", "start": 8, "end": 15},
            {"kind": "date", "presence": "not_applicable", "start": 21, "end": 54},
            {"kind": "start_time", "presence": "not_applicable", "start": 62, "end": 67},
            {"kind": "meeting_type", "presence": "not_applicable", "start": 92, "end": 101},
            {"kind": "location", "presence": "not_applicable", "start": 138, "end": 149},
            {"kind": "president", "presence": "present", "start": 172, "end": 183},
            {"kind": "councilor", "presence": "present", "start": 213, "end": 221},
            {"kind": "councilor", "presence": "absent", "start": 241, "end": 250},
            {"kind": "end_time", "presence": "not_applicable", "start": 404, "end": 409},
        ],
        "segments": [
            {"type": "opening", "start": 0, "end": 251},
            {"type": "closing", "start": 345, "end": 416},
        ],
    },
    {
        "doc_id": "beta-001",
        "municipality": "Vila Beta",
        "language": "pt",
        "text": (
            "Ata n.º 3/2021. Reuniu a Câmara Municipal de Vila Beta em 2021-04-05. "
            "Nada foi deliberado nesta sessão de trabalho."
        ),
        "entities": [
            {"kind": "meeting_number", "presence": "not_applicable", "start": 8, "end": 14},
            {"kind": "date", "presence": "not_applicable", "start": 58, "end": 68},
        ],
        "segments": [
            {"type": "opening", "start": 0, "end": 69},
            {"type": "closing", "null": True},
        ],
    },
]


@pytest.fixture()
def sample_corpus_path(tmp_path: Path) -> Path:
    path = tmp_path / "corpus.jsonl"
    with path.open("w", encoding="utf-8") as handle:
        for record in SAMPLE_RECORDS:
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")
    return path


@pytest.fixture()
def sample_corpus(sample_corpus_path):
    return load_corpus(sample_corpus_path)
