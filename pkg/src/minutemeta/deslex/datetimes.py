"""Date/time surface parsing and perturbation.

Recognized surfaces are re-rendered in a random alternative format or
content-shifted within valid calendar/clock ranges. Anything unparseable
(spelled-out times, partial dates) is returned verbatim: municipal minutes
are full of free-form temporal phrases and corrupting them would be worse
than leaving them alone.
"""
from __future__ import annotations

import calendar
import logging
import random
import re
from dataclasses import dataclass

from minutemeta.errors import UnparseableDatetime

logger = logging.getLogger(__name__)

PT_MONTHS = (
    "janeiro", "fevereiro", "março", "abril", "maio", "junho",
    "julho", "agosto", "setembro", "outubro", "novembro", "dezembro",
)
EN_MONTHS = (
    "january", "february", "march", "april", "may", "june",
    "july", "august", "september", "october", "november", "december",
)

_MONTH_INDEX = {name: i + 1 for i, name in enumerate(PT_MONTHS)}
_MONTH_INDEX.update({name: i + 1 for i, name in enumerate(EN_MONTHS)})

DEFAULT_RULES = frozenset({"reformat", "shift_day", "shift_hour", "shift_minute"})


@dataclass(frozen=True)
class ParsedDate:
    day: int
    month: int
    year: int
    language: str


@dataclass(frozen=True)
class ParsedTime:
    hour: int
    minute: int
    language: str


_DATE_PATTERNS = (
    (re.compile(r"^(\d{1,2}) de (\w+) de (\d{4})$", re.IGNORECASE), "pt_long"),
    (re.compile(r"^(\w+) (\d{1,2}), (\d{4})$", re.IGNORECASE), "en_long"),
    (re.compile(r"^(\d{1,2}) (\w+) (\d{4})$", re.IGNORECASE), "en_day_first"),
    (re.compile(r"^(\d{1,2})/(\d{1,2})/(\d{4})$"), "slash"),
    (re.compile(r"^(\d{1,2})-(\d{1,2})-(\d{4})$"), "dash"),
    (re.compile(r"^(\d{4})-(\d{1,2})-(\d{1,2})$"), "iso"),
    (re.compile(r"^(\d{1,2})\.(\d{1,2})\.(\d{4})$"), "dots"),
)

_TIME_PATTERNS = (
    (re.compile(r"^(\d{1,2}):(\d{2})(?: horas| hours)?$", re.IGNORECASE), "colon"),
    (re.compile(r"^(\d{1,2})h(\d{2})$", re.IGNORECASE), "h"),
    (re.compile(r"^(\d{1,2})\.(\d{2})(?: horas)?$", re.IGNORECASE), "dot"),
    (re.compile(r"^(\d{1,2}) horas e (\d{1,2}) minutos$", re.IGNORECASE), "pt_words"),
    (re.compile(r"^(\d{1,2}) hours and (\d{1,2}) minutes$", re.IGNORECASE), "en_words"),
    (re.compile(r"^(\d{1,2}) horas$", re.IGNORECASE), "pt_hour_only"),
)


def parse_datetime(surface: str) -> ParsedDate | ParsedTime:
    """Parse a date or time mention; raises UnparseableDatetime otherwise."""
    text = surface.strip()
    for pattern, shape in _DATE_PATTERNS:
        match = pattern.match(text)
        if not match:
            continue
        if shape == "pt_long":
            day, month_name, year = match.groups()
            month = _MONTH_INDEX.get(month_name.lower())
            if month is None:
                continue
            parsed = ParsedDate(int(day), month, int(year), "pt")
        elif shape in ("en_long", "en_day_first"):
            if shape == "en_long":
                month_name, day, year = match.groups()
            else:
                day, month_name, year = match.groups()
            month = _MONTH_INDEX.get(month_name.lower())
            if month is None:
                continue
            parsed = ParsedDate(int(day), month, int(year), "en")
        elif shape == "iso":
            year, month, day = match.groups()
            parsed = ParsedDate(int(day), int(month), int(year), "pt")
        else:
            day, month, year = match.groups()
            parsed = ParsedDate(int(day), int(month), int(year), "pt")
        if 1 <= parsed.month <= 12 and 1 <= parsed.day <= calendar.monthrange(
            parsed.year, parsed.month
        )[1]:
            return parsed
    for pattern, shape in _TIME_PATTERNS:
        match = pattern.match(text)
        if not match:
            continue
        groups = match.groups()
        hour = int(groups[0])
        minute = int(groups[1]) if len(groups) > 1 and groups[1] is not None else 0
        language = "en" if shape.startswith("en") else "pt"
        if 0 <= hour <= 23 and 0 <= minute <= 59:
            return ParsedTime(hour, minute, language)
    raise UnparseableDatetime(f"unrecognized date/time surface {surface!r}")


def render_date(date: ParsedDate, rng: random.Random) -> str:
    months = PT_MONTHS if date.language == "pt" else EN_MONTHS
    month_name = months[date.month - 1]
    if date.language == "pt":
        formats = (
            f"{date.day} de {month_name} de {date.year}",
            f"{date.day:02d}/{date.month:02d}/{date.year}",
            f"{date.day:02d}-{date.month:02d}-{date.year}",
            f"{date.year}-{date.month:02d}-{date.day:02d}",
            f"{date.day:02d}.{date.month:02d}.{date.year}",
        )
    else:
        formats = (
            f"{month_name.capitalize()} {date.day}, {date.year}",
            f"{date.day} {month_name.capitalize()} {date.year}",
            f"{date.day:02d}/{date.month:02d}/{date.year}",
            f"{date.year}-{date.month:02d}-{date.day:02d}",
        )
    return rng.choice(formats)


def render_time(time_value: ParsedTime, rng: random.Random) -> str:
    if time_value.language == "pt":
        formats = (
            f"{time_value.hour:02d}:{time_value.minute:02d}",
            f"{time_value.hour}h{time_value.minute:02d}",
            f"{time_value.hour:02d}.{time_value.minute:02d}",
            f"{time_value.hour} horas e {time_value.minute} minutos",
        )
    else:
        formats = (
            f"{time_value.hour:02d}:{time_value.minute:02d}",
            f"{time_value.hour} hours and {time_value.minute} minutes",
        )
    return rng.choice(formats)


def perturb_datetime(surface: str, rules=DEFAULT_RULES, rng: random.Random | None = None) -> str:
    """Vary a date/time surface in format or content.

    Output always re-parses; a perturbation that happens to render back to
    the input is redrawn (bounded); unparseable input is returned unchanged.
    """
    rng = rng or random.Random()
    rules = frozenset(rules)
    try:
        parse_datetime(surface)
    except UnparseableDatetime:
        logger.debug("leaving unparseable datetime surface %r untouched", surface)
        return surface
    for _ in range(10):
        variant = _perturb_once(surface, rules, rng)
        if variant != surface:
            return variant
    return variant


def _perturb_once(surface: str, rules: frozenset, rng: random.Random) -> str:
    parsed = parse_datetime(surface)
    if isinstance(parsed, ParsedDate):
        if "shift_day" in rules and rng.random() < 0.5:
            last_day = calendar.monthrange(parsed.year, parsed.month)[1]
            parsed = ParsedDate(rng.randint(1, last_day), parsed.month, parsed.year,
                                parsed.language)
        if "reformat" not in rules:
            # Content-only perturbation keeps the original rendering shape
            # when possible; the long form is the safe default.
            months = PT_MONTHS if parsed.language == "pt" else EN_MONTHS
            if parsed.language == "pt":
                return f"{parsed.day} de {months[parsed.month - 1]} de {parsed.year}"
            return f"{months[parsed.month - 1].capitalize()} {parsed.day}, {parsed.year}"
        return render_date(parsed, rng)

    hour, minute = parsed.hour, parsed.minute
    if "shift_hour" in rules and rng.random() < 0.5:
        hour = rng.randint(8, 22)
    if "shift_minute" in rules and rng.random() < 0.5:
        minute = rng.choice((0, 15, 30, 45))
    shifted = ParsedTime(hour, minute, parsed.language)
    if "reformat" not in rules:
        return f"{shifted.hour:02d}:{shifted.minute:02d}"
    return render_time(shifted, rng)
