"""Serialization of local and global explanations to JSON and static HTML.

JSON output is canonical: keys sorted, floats fixed to six decimals, ASCII
escapes only.  Identical in-memory reports therefore serialize to identical
bytes on every platform, which the determinism guarantees depend on.
"""

from __future__ import annotations

import html
import json
import math
import re
from typing import Mapping, Sequence

from . import textprep
from .config import RunConfig
from .errors import BadReport, IoFailure
from .features import METHOD_MLWE, METHOD_ORDER
from .global_scores import ClusterRecord, CorpusDocument, GlobalScores
from .local import ExplanationSet, LocalExplanation

SCHEMA_VERSION = "1"
DEFAULT_TOP_N = 50

_MLWE_LABEL_RE = re.compile(r"^mlwe-K(\d+)-c(\d+)$")


def _format_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"cannot serialize non-finite float {x}")
    if x == 0.0:
        x = 0.0  # collapse -0.0
    return f"{x:.6f}"


def canonical_json(value) -> bytes:
    """Deterministic JSON bytes: sorted keys, 6-decimal floats, ASCII-only."""
    pieces: list[str] = []
    _emit(value, pieces)
    return ("".join(pieces) + "\n").encode("ascii")


def _emit(value, pieces: list[str]):
    if value is None or value is True or value is False:
        pieces.append(json.dumps(value))
    elif isinstance(value, bool):  # pragma: no cover - caught above
        pieces.append(json.dumps(value))
    elif isinstance(value, int):
        pieces.append(str(value))
    elif isinstance(value, float):
        pieces.append(_format_float(value))
    elif isinstance(value, str):
        pieces.append(json.dumps(value, ensure_ascii=True))
    elif isinstance(value, Mapping):
        keys = list(value.keys())
        if any(not isinstance(k, str) for k in keys):
            raise ValueError("canonical JSON requires string keys")
        pieces.append("{")
        for i, key in enumerate(sorted(keys)):
            if i:
                pieces.append(",")
            pieces.append(json.dumps(key, ensure_ascii=True))
            pieces.append(":")
            _emit(value[key], pieces)
        pieces.append("}")
    elif isinstance(value, (list, tuple)):
        pieces.append("[")
        for i, item in enumerate(value):
            if i:
                pieces.append(",")
            _emit(item, pieces)
        pieces.append("]")
    else:
        raise ValueError(f"cannot serialize {type(value).__name__} canonically")


def _explanation_record(exp: LocalExplanation, tokens) -> dict:
    record = {
        "label": exp.feature.label,
        "method": exp.feature.method,
        "token_positions": list(exp.feature.token_positions),
        "tokens": [tokens[p].text for p in exp.feature.token_positions],
        "kind": exp.kind,
        "p_o": list(exp.p_o),
        "p_f": list(exp.p_f),
        "label_o": exp.label_o,
        "label_f": exp.label_f,
        "npir": list(exp.npir),
        "informative": exp.informative,
    }
    if exp.replaced:
        record["replaced"] = [
            {"position": p, "original": orig, "replacement": repl}
            for p, orig, repl in exp.replaced
        ]
    if exp.feature.parent_labels:
        record["parent_labels"] = list(exp.feature.parent_labels)
    if exp.mlwe_k is not None:
        record["k"] = exp.mlwe_k
        record["cluster"] = exp.mlwe_cluster
    return record


def local_report(explanation_set: ExplanationSet, config: RunConfig) -> dict:
    """Schema-version-1 dictionary form of one document's explanations."""
    meta = explanation_set.mlwe_meta
    return {
        "schema_version": SCHEMA_VERSION,
        "document_id": explanation_set.document_id,
        "original_text": explanation_set.text,
        "class_names": list(explanation_set.class_names),
        "predicted_label": explanation_set.class_names[explanation_set.label_o],
        "predicted_index": explanation_set.label_o,
        "p_o": list(explanation_set.p_o),
        "explanations": {
            method: [
                _explanation_record(exp, explanation_set.tokens)
                for exp in explanation_set.explanations.get(method, ())
            ]
            for method in METHOD_ORDER
        },
        "mlwe_meta": {
            "seed": meta.seed,
            "k": meta.k,
            "k_scores": {str(k): score for k, score in meta.k_scores},
            "skipped": meta.skipped,
            "reason": meta.reason,
        },
        "config": config.echo(),
    }


def emit_local(report: dict, format: str = "json") -> bytes:
    if format == "json":
        return canonical_json(report)
    if format == "html":
        return _local_html(report).encode("utf-8")
    raise ValueError(f"unknown report format {format!r}")


def parse_local(data: bytes) -> dict:
    """Parse and gate a serialized local report on its schema version."""
    try:
        report = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise BadReport(f"not a JSON report: {exc}") from exc
    if not isinstance(report, dict):
        raise BadReport("report root must be an object")
    version = report.get("schema_version")
    if version != SCHEMA_VERSION:
        raise BadReport(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION!r})")
    return report


def corpus_document_from_report(report: dict) -> CorpusDocument:
    """Extract the aggregation slice from a parsed local report."""
    records = []
    for record in report.get("explanations", {}).get(METHOD_MLWE, []):
        if record.get("kind") != "removal":
            continue
        k, cluster = record.get("k"), record.get("cluster")
        if k is None:
            match = _MLWE_LABEL_RE.match(record.get("label", ""))
            if not match:
                raise BadReport(f"cluster record lacks K: {record.get('label')!r}")
            k, cluster = int(match.group(1)), int(match.group(2))
        records.append(
            ClusterRecord(
                npir=tuple(record["npir"]),
                k=int(k),
                cluster=int(cluster),
                token_texts=tuple(record["tokens"]),
            )
        )
    return CorpusDocument(str(report["document_id"]), tuple(records))


def global_report(scores: GlobalScores, top_n: int = DEFAULT_TOP_N) -> dict:
    """Per-class lemma arrays sorted by influence, plus a top-N convenience cut."""
    classes = {}
    for index, name in enumerate(scores.class_names):
        gai_map = scores.gai[index]
        gri_map = scores.gri[index]
        rows = [
            {"lemma": lemma, "gai": gai_map[lemma], "gri": gri_map.get(lemma, 0.0)}
            for lemma in gai_map
        ]
        rows.sort(key=lambda row: (-row["gai"], row["lemma"]))
        classes[name] = {"lemmas": rows, "top": rows[: max(0, top_n)]}
    return {
        "schema_version": SCHEMA_VERSION,
        "class_names": list(scores.class_names),
        "corpus_size": scores.corpus_size,
        "skipped_documents": scores.skipped_documents,
        "classes": classes,
    }


def emit_global(report: dict) -> bytes:
    return canonical_json(report)


def write_bytes(path, data: bytes):
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise IoFailure(f"cannot write report {path}: {exc}") from exc


_HTML_STYLE = """
body { font-family: Georgia, serif; margin: 2em auto; max-width: 60em; color: #222; }
h1 { font-size: 1.4em; } h2 { font-size: 1.1em; margin-top: 1.6em; }
table { border-collapse: collapse; font-size: 0.9em; }
td, th { border: 1px solid #bbb; padding: 0.3em 0.6em; text-align: left; }
.doc { border: 1px solid #ccc; padding: 0.8em; margin: 0.6em 0; line-height: 1.7; }
.meta { color: #666; font-size: 0.85em; }
.hit { border-radius: 3px; padding: 0 2px; }
"""


def _highlight(text: str, positions: Sequence[int], npir_value: float,
               replacements: Mapping[int, str] = {}) -> str:
    """Wrap the feature's tokens in spans whose background tracks the influence.

    Substituted tokens render as "[original] replacement", mirroring how the
    perturbed text actually read.
    """
    tokens = textprep.tokenize(text)
    wanted = set(positions)
    alpha = max(0.0, min(1.0, npir_value))
    pieces = []
    cursor = 0
    for tok in tokens:
        start, end = tok.char_span
        if tok.position in wanted:
            shown = html.escape(text[start:end])
            if tok.position in replacements:
                shown = f"[{shown}] {html.escape(replacements[tok.position])}"
            pieces.append(html.escape(text[cursor:start]))
            pieces.append(
                f'<span class="hit" data-npir="{npir_value:.6f}" '
                f'style="background: rgba(229,57,53,{alpha:.3f})">{shown}</span>'
            )
            cursor = end
    pieces.append(html.escape(text[cursor:]))
    return "".join(pieces)


def _local_html(report: dict) -> str:
    class_names = report["class_names"]
    selected = report["predicted_index"]
    out = [
        "<!DOCTYPE html><html><head><meta charset='utf-8'>",
        f"<title>{html.escape(report['document_id'])}</title>",
        f"<style>{_HTML_STYLE}</style></head><body>",
        f"<h1>Explanation: {html.escape(report['document_id'])}</h1>",
        f"<p class='meta'>predicted <b>{html.escape(report['predicted_label'])}</b> "
        f"(p = {report['p_o'][selected]:.4f}); class of interest: "
        f"{html.escape(class_names[selected])}</p>",
        f"<div class='doc'>{html.escape(report['original_text'])}</div>",
        "<h2>Influential features</h2>",
    ]
    records = [
        record
        for method in METHOD_ORDER
        for record in report["explanations"].get(method, [])
    ]
    shown = [r for r in records if r["informative"]]
    if not shown:
        out.append("<p class='meta'>No feature met the informativeness threshold.</p>")
    for record in shown:
        out.append(
            f"<p class='meta'>{html.escape(record['label'])} / {record['kind']} "
            f"&rarr; nPIR({html.escape(class_names[selected])}) = "
            f"{record['npir'][selected]:.4f}</p>"
        )
        replacements = {
            entry["position"]: entry["replacement"]
            for entry in record.get("replaced", [])
        }
        out.append(
            "<div class='doc'>"
            + _highlight(report["original_text"], record["token_positions"],
                         record["npir"][selected], replacements)
            + "</div>"
        )
    out.append("<h2>All perturbation trials</h2><table>")
    out.append(
        "<tr><th>feature</th><th>kind</th><th>label before</th><th>label after</th>"
        + "".join(f"<th>nPIR({html.escape(c)})</th>" for c in class_names)
        + "<th>informative</th></tr>"
    )
    for record in records:
        out.append(
            f"<tr><td>{html.escape(record['label'])}</td><td>{record['kind']}</td>"
            f"<td>{html.escape(class_names[record['label_o']])}</td>"
            f"<td>{html.escape(class_names[record['label_f']])}</td>"
            + "".join(f"<td>{v:.4f}</td>" for v in record["npir"])
            + f"<td>{'yes' if record['informative'] else 'no'}</td></tr>"
        )
    out.append("</table>")
    meta = report["mlwe_meta"]
    if meta.get("k") is not None:
        scores_text = ", ".join(
            f"K={k}: {meta['k_scores'][k]:.4f}" for k in sorted(meta["k_scores"], key=int)
        )
        out.append(
            f"<p class='meta'>embedding clustering: chose K={meta['k']} "
            f"(seed {meta['seed']}; scores {scores_text})</p>"
        )
    elif meta.get("skipped"):
        out.append(f"<p class='meta'>embedding clustering skipped: {html.escape(str(meta.get('reason')))}</p>")
    out.append("</body></html>")
    return "".join(out)
