"""LLM report payloads and prompts, plus the chat-completions request.

The payload nests category -> part -> {"Q1", "Median", "Q3"} with values
rounded half-to-even. The endpoint shape is a generic chat-completions POST so
any vendor (or a local stub) can serve it.
"""

from __future__ import annotations

import json
import os

import requests

from .aggregate import CategoryStats
from .errors import (
    ReportConfigError,
    ReportProtocolError,
    ReportTimeoutError,
    ReportTransportError,
    StatsError,
)

PAYLOAD_PLACEHOLDER = "{payload}"

DEFAULT_TOKEN_ENV = "PQAH_LLM_TOKEN"

DEFAULT_PROMPT_TEMPLATE = """\
Act as an AI expert specialized in creating user-friendly reports, and \
generate a brief report summarizing the main advantages and disadvantages of \
a network, and offer technical suggestions on how to improve it. This report \
will be based on a part-based quantitative analysis of heatmaps (PQAH) data \
presented in JSON format. The PQAH data specifically pertains to part-based \
heatmap analysis, with these heatmaps being derived from a Deep Neural \
Network (DNN).

The provided data is structured as follows:

- Top-level keys in the JSON file represent different categories.
- Sub-level keys within each category represent individual parts.
- For each part in each category, we have access to three key performance \
metrics: Q1, Median, and Q3 F1 scores.
- 'Bg' represents background

It's important to note that the F1 score for each part is calculated based on \
a comparison between the heatmap generated by the network and the ground \
truth part annotation. High F1 scores indicate a strong overlap between the \
heatmap and the ground-truth part annotation. Heatmap highlights the regions \
of an input image responsible for a network's classification result.

Now, based on the PQAH data provided in the following chat, proceed to \
analyze the main pros and cons of the network and provide technical \
suggestions with references (high-rank conferences and journal papers) to \
improve the network.

PQAH data:

{payload}
"""


def build_report_payload(stats: CategoryStats, precision_digits: int = 2) -> dict:
    """Nest group quartiles as category -> part -> {Q1, Median, Q3}.

    Categories are ordered alphabetically, parts as in the stats (ascending,
    "Bg" last); leaves are rounded half-to-even to precision_digits.
    """
    if not stats.groups:
        raise StatsError("nothing to report: stats are empty")
    if precision_digits < 0:
        raise ValueError(f"precision_digits must be >= 0, got {precision_digits}")
    payload: dict[str, dict[str, dict[str, float]]] = {}
    for g in stats.groups:  # already category asc, part asc with Bg last
        payload.setdefault(g.category, {})[g.part] = {
            "Q1": round(g.q1, precision_digits),
            "Median": round(g.q2, precision_digits),
            "Q3": round(g.q3, precision_digits),
        }
    return payload


def render_payload_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, ensure_ascii=False)


def build_prompt(payload: dict, template: str = DEFAULT_PROMPT_TEMPLATE) -> str:
    """Substitute the pretty-printed payload into the template.

    The template must contain the placeholder "{payload}" exactly once.
    """
    count = template.count(PAYLOAD_PLACEHOLDER)
    if count != 1:
        raise ValueError(
            f"prompt template must contain {PAYLOAD_PLACEHOLDER!r} exactly once, found {count}"
        )
    return template.replace(PAYLOAD_PLACEHOLDER, render_payload_json(payload))


def request_report(
    prompt: str,
    endpoint: str,
    model: str,
    token_env: str = DEFAULT_TOKEN_ENV,
    timeout: float = 120.0,
) -> str:
    """Send the prompt as a single-user-message chat completion, return the reply.

    The bearer token is read from the environment variable named by token_env
    and never logged. No implicit retries.
    """
    if not endpoint:
        raise ReportConfigError("no LLM endpoint configured")
    token = os.environ.get(token_env)
    if not token:
        raise ReportConfigError(f"environment variable {token_env} is not set")

    body = {"model": model, "messages": [{"role": "user", "content": prompt}]}
    headers = {"Authorization": f"Bearer {token}"}
    try:
        response = requests.post(endpoint, json=body, headers=headers, timeout=timeout)
    except requests.exceptions.Timeout as exc:
        raise ReportTimeoutError(f"no answer from {endpoint} within {timeout}s") from exc
    except requests.exceptions.RequestException as exc:
        raise ReportTransportError(f"request to {endpoint} failed: {exc}") from exc

    if not 200 <= response.status_code < 300:
        excerpt = response.text[:200]
        raise ReportTransportError(
            f"endpoint returned HTTP {response.status_code}: {excerpt}",
            status=response.status_code,
            body_excerpt=excerpt,
        )
    try:
        data = response.json()
        content = data["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        raise ReportProtocolError(f"response body is not a chat completion: {exc!r}") from exc
    if not isinstance(content, str):
        raise ReportProtocolError("assistant content is not text")
    return content
