"""Synthetic templated minutes for smoke tests and demos.

Generates corpora with the same shape as real data: an opening section with
the administrative metadata, a long deliberation body, and (usually) a short
closing section, all with exact entity/segment annotations. Deterministic
given the seed.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from minutemeta.corpus.segmentation import sentence_split
from minutemeta.corpus.types import (
    AnnotatedMinute,
    Corpus,
    EntityAnnotation,
    Language,
    MetadataCategory,
    MetadataKind,
    MinuteDocument,
    Presence,
    SegmentAnnotation,
    SegmentType,
)
from minutemeta.deslex import wordlists

DEFAULT_MUNICIPALITIES = (
    "Vila Aurora", "Monte Claro", "Foz Antiga", "Campo Novo", "Serra Alta",
    "Lago Fundo",
)

_PT_TOPICS = (
    "águas e saneamento", "educação", "urbanismo", "cultura", "desporto",
    "transportes", "habitação", "ambiente", "turismo", "proteção civil",
    "mercados municipais", "iluminação pública", "espaços verdes",
    "ação social", "juventude", "feiras locais", "cemitérios",
    "toponímia", "trânsito", "obras municipais",
)

_PT_BODY_TEMPLATES = (
    "O executivo analisou o relatório sobre {topic} apresentado pelos serviços.",
    "Foi apreciada a proposta de regulamento relativa a {topic}.",
    "Discutiu-se o pedido de apoio financeiro na área de {topic}.",
    "Os serviços prestaram esclarecimentos sobre o concurso de {topic}.",
    "Foi deliberado adjudicar a empreitada relacionada com {topic}.",
    "Tomou-se conhecimento do parecer jurídico sobre {topic}.",
    "Aprovou-se por unanimidade a minuta do protocolo de {topic}.",
    "Foi presente a informação técnica número {number} sobre {topic}.",
    "O ponto sobre {topic} foi retirado da ordem do dia.",
    "Agendou-se nova visita às instalações ligadas a {topic}.",
)

_EN_TOPICS = (
    "water and sanitation", "education", "urban planning", "culture", "sport",
    "transport", "housing", "environment", "tourism", "civil protection",
    "municipal markets", "street lighting", "green spaces", "social action",
    "youth programmes", "local fairs", "cemeteries", "street naming",
    "traffic", "municipal works",
)

_EN_BODY_TEMPLATES = (
    "The board reviewed the report on {topic} submitted by the services.",
    "The draft regulation concerning {topic} was examined.",
    "A funding request in the area of {topic} was discussed.",
    "The services clarified the tender for {topic}.",
    "It was decided to award the contract related to {topic}.",
    "The legal opinion on {topic} was noted.",
    "The protocol draft on {topic} was unanimously approved.",
    "Technical note number {number} on {topic} was tabled.",
    "The item on {topic} was withdrawn from the agenda.",
    "A new visit to the facilities linked to {topic} was scheduled.",
)

_PT_MONTH_NAMES = (
    "janeiro", "fevereiro", "março", "abril", "maio", "junho",
    "julho", "agosto", "setembro", "outubro", "novembro", "dezembro",
)


@dataclass
class SynthConfig:
    municipalities: tuple[str, ...] = DEFAULT_MUNICIPALITIES
    docs_per_municipality: int = 5
    language: Language = Language.PT
    body_sentences: tuple[int, int] = (45, 70)
    null_closing_rate: float = 0.15
    councilors: tuple[int, int] = (2, 4)
    seed: int = 0


class _SpanWriter:
    """Accumulates text while recording entity spans as they are appended."""

    def __init__(self):
        self.parts: list[str] = []
        self.length = 0
        self.entities: list[EntityAnnotation] = []

    def add(self, text: str) -> None:
        self.parts.append(text)
        self.length += len(text)

    def entity(self, surface: str, kind: MetadataKind,
               presence: Presence = Presence.NOT_APPLICABLE) -> None:
        start = self.length
        self.add(surface)
        self.entities.append(
            EntityAnnotation(
                category=MetadataCategory(kind, presence),
                start=start,
                end=start + len(surface),
                surface=surface,
            )
        )

    @property
    def text(self) -> str:
        return "".join(self.parts)


def _person(rng: random.Random, language: Language) -> str:
    if language == Language.PT:
        return f"{rng.choice(wordlists.PT_GIVEN)} {rng.choice(wordlists.PT_SURNAMES)}"
    return f"{rng.choice(wordlists.EN_GIVEN)} {rng.choice(wordlists.EN_SURNAMES)}"


_PT_VENUES = (
    "Salão Nobre dos Paços do Concelho", "Sala de Sessões do Edifício Sede",
    "Auditório do Centro Cultural", "Sala Polivalente da Biblioteca",
    "Auditório da Junta de Freguesia", "Sala de Reuniões do Mercado Velho",
)

_EN_VENUES = (
    "Main Hall of the Civic Centre", "Council Chamber of the Old Market",
    "Auditorium of the Public Library", "Assembly Room of the Cultural Centre",
    "Committee Room of the Community Centre",
)


def _location(rng: random.Random, language: Language) -> str:
    return rng.choice(_PT_VENUES if language == Language.PT else _EN_VENUES)


def _make_minute(
    doc_id: str, municipality: str, config: SynthConfig, rng: random.Random
) -> AnnotatedMinute:
    language = config.language
    writer = _SpanWriter()

    number = f"{rng.randint(1, 40)}/{rng.randint(2018, 2024)}"
    day = rng.randint(1, 28)
    month = rng.randint(1, 12)
    year = rng.randint(2018, 2024)
    start_hour = rng.randint(8, 15)
    start_minute = rng.choice((0, 15, 30, 45))
    meeting_type = rng.choice(("ordinária", "extraordinária")) \
        if language == Language.PT else rng.choice(("ordinary", "extraordinary"))
    location = _location(rng, language)
    president = _person(rng, language)
    n_councilors = rng.randint(*config.councilors)
    councilors = [_person(rng, language) for _ in range(n_councilors)]
    absent = _person(rng, language)
    substitute = _person(rng, language)

    if language == Language.PT:
        date_surface = f"{day} de {_PT_MONTH_NAMES[month - 1]} de {year}"
        time_surface = f"{start_hour:02d}:{start_minute:02d}"
        writer.add("Ata n.º ")
        writer.entity(number, MetadataKind.MEETING_NUMBER)
        writer.add(". Aos ")
        writer.entity(date_surface, MetadataKind.DATE)
        writer.add(", pelas ")
        writer.entity(time_surface, MetadataKind.START_TIME)
        writer.add(" horas, reuniu em sessão ")
        writer.entity(meeting_type, MetadataKind.MEETING_TYPE)
        writer.add(f" a Câmara Municipal de {municipality}. A sessão decorreu no ")
        writer.entity(location, MetadataKind.LOCATION)
        writer.add(", sob a presidência de ")
        writer.entity(president, MetadataKind.PRESIDENT, Presence.PRESENT)
        writer.add(". Estiveram presentes os vereadores ")
        for i, councilor in enumerate(councilors):
            if i:
                writer.add(" e " if i == len(councilors) - 1 else ", ")
            writer.entity(councilor, MetadataKind.COUNCILOR, Presence.PRESENT)
        writer.add(". Esteve ausente o vereador ")
        writer.entity(absent, MetadataKind.COUNCILOR, Presence.ABSENT)
        writer.add(". Em sua substituição participou o vereador ")
        writer.entity(substitute, MetadataKind.COUNCILOR, Presence.SUBSTITUTED)
        writer.add(". Aberta a sessão, a ordem do dia foi lida e aceite para discussão imediata.")
    else:
        months = (
            "January", "February", "March", "April", "May", "June", "July",
            "August", "September", "October", "November", "December",
        )
        date_surface = f"{months[month - 1]} {day}, {year}"
        time_surface = f"{start_hour:02d}:{start_minute:02d}"
        writer.add("Minutes no. ")
        writer.entity(number, MetadataKind.MEETING_NUMBER)
        writer.add(". On ")
        writer.entity(date_surface, MetadataKind.DATE)
        writer.add(", at ")
        writer.entity(time_surface, MetadataKind.START_TIME)
        writer.add(", the municipal council of ")
        writer.add(municipality)
        writer.add(" met in ")
        writer.entity(meeting_type, MetadataKind.MEETING_TYPE)
        writer.add(" session. The sitting took place at the ")
        writer.entity(location, MetadataKind.LOCATION)
        writer.add(", chaired by ")
        writer.entity(president, MetadataKind.PRESIDENT, Presence.PRESENT)
        writer.add(". Councillors in attendance: ")
        for i, councilor in enumerate(councilors):
            if i:
                writer.add(" and " if i == len(councilors) - 1 else ", ")
            writer.entity(councilor, MetadataKind.COUNCILOR, Presence.PRESENT)
        writer.add(". Councillor ")
        writer.entity(absent, MetadataKind.COUNCILOR, Presence.ABSENT)
        writer.add(" was absent from the sitting. In replacement, councillor ")
        writer.entity(substitute, MetadataKind.COUNCILOR, Presence.SUBSTITUTED)
        writer.add(" attended. The session was opened and the agenda was read and accepted for immediate discussion.")

    opening_end = writer.length

    topics = _PT_TOPICS if language == Language.PT else _EN_TOPICS
    templates = _PT_BODY_TEMPLATES if language == Language.PT else _EN_BODY_TEMPLATES
    for _ in range(rng.randint(*config.body_sentences)):
        template = rng.choice(templates)
        writer.add(" ")
        writer.add(template.format(topic=rng.choice(topics), number=rng.randint(1, 500)))

    has_closing = rng.random() >= config.null_closing_rate
    closing_start = None
    if has_closing:
        end_hour = min(23, start_hour + rng.randint(1, 5))
        end_minute = rng.choice((0, 15, 30, 45))
        writer.add(" ")
        closing_start = writer.length
        if language == Language.PT:
            writer.add(
                "E nada mais havendo a tratar, o Presidente deu por encerrada a "
                "reunião pelas "
            )
            writer.entity(f"{end_hour:02d}:{end_minute:02d}", MetadataKind.END_TIME)
            writer.add(
                f" horas, na Câmara Municipal de {municipality}. Esta ata, depois "
                "de lida, vai ser assinada por todos os presentes."
            )
        else:
            writer.add("There being no further business, the chair closed the meeting at ")
            writer.entity(f"{end_hour:02d}:{end_minute:02d}", MetadataKind.END_TIME)
            writer.add(
                f", at the municipal council of {municipality}. These minutes, "
                "once read, will be signed by all present."
            )

    text = writer.text
    document = MinuteDocument(
        doc_id=doc_id,
        municipality=municipality,
        language=language,
        text=text,
        sentences=tuple(sentence_split(text, language)),
    )
    opening_span = document.snap_span(0, opening_end)
    segments = [SegmentAnnotation(SegmentType.OPENING, opening_span)]
    if has_closing:
        segments.append(
            SegmentAnnotation(
                SegmentType.CLOSING, document.snap_span(closing_start, len(text))
            )
        )
    else:
        segments.append(SegmentAnnotation(SegmentType.CLOSING, None))
    return AnnotatedMinute(
        document=document,
        entities=tuple(writer.entities),
        segments=tuple(segments),
    )


def generate_corpus(config: SynthConfig | None = None) -> Corpus:
    config = config or SynthConfig()
    minutes = []
    for municipality in config.municipalities:
        for i in range(config.docs_per_municipality):
            slug = municipality.lower().replace(" ", "-")
            doc_id = f"{slug}-{i:03d}"
            rng = random.Random(f"{config.seed}:{doc_id}")
            minutes.append(_make_minute(doc_id, municipality, config, rng))
    return Corpus(tuple(minutes))
