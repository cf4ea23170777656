import json
from pathlib import Path
from typing import Any, Mapping

from rich.console import Console
from rich.markup import escape
from rich.panel import Panel

MAX_VALUE_CHARS = 150


def _out(console: Console | None) -> Console:
    return console if console is not None else Console()


def _truncate(value: Any) -> str:
    text = str(value)
    return text if len(text) <= MAX_VALUE_CHARS else text[:MAX_VALUE_CHARS] + "..."


def _key(key: Any) -> str:
    return f"[bold cyan]{key}[/bold cyan]"


def _inline(value: Any) -> str:
    if isinstance(value, Mapping):
        return "{ " + ", ".join(f"{_key(k)}: {_truncate(v)}" for k, v in value.items()) + " }"
    if isinstance(value, (list, tuple)):
        return _truncate(", ".join(str(v) for v in value))
    return _truncate(value)


def log_step(
    title: str,
    detail: Mapping[str, Any] | None = None,
    symbol: str = "🟢",
    console: Console | None = None,
):
    """Headline for one CLI stage; `detail` goes on a dim key=value line under it."""
    out = _out(console)
    out.print(f"\n[b]{symbol} {title}[/b]")
    if detail:
        out.print("[dim]" + "  ".join(f"{k}={_inline(v)}" for k, v in detail.items()) + "[/dim]")


def log_error(
    message: str,
    err: BaseException | None = None,
    exit_code: int | None = None,
    console: Console | None = None,
):
    out = _out(console)
    suffix = f" (exit {exit_code})" if exit_code is not None else ""
    out.print(f"\n[red]❌ {message}{suffix}[/red]")
    if err is not None:
        out.print(f"[dim]{escape(str(err))}[/dim]")


def log_json_block(title: str, block: Mapping[str, Any], console: Console | None = None):
    """Config-style panel: one key per line, nested mappings indented, sequences inline."""
    lines = []
    for k, v in block.items():
        if isinstance(v, Mapping):
            lines.append(f"{_key(k)}:")
            lines += [f"  {_key(sk)}: {_inline(sv)}" for sk, sv in v.items()]
        elif isinstance(v, (list, tuple)) and v and all(isinstance(item, Mapping) for item in v):
            lines.append(f"{_key(k)}:")
            lines += ["  " + _inline(item) for item in v]
        else:
            lines.append(f"{_key(k)}: {_inline(v)}")
    panel = Panel("\n".join(lines), title=f"📌 {title}", title_align="left", border_style="cyan", expand=False)
    _out(console).print(panel)


def save_text(text: str, path: Path, quiet: bool = False, console: Console | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    if not quiet:
        _out(console).print(f"[green]📝 Saved:[/green] {path}")
    return path


def save_json(obj: Any, path: Path, quiet: bool = False, console: Console | None = None) -> Path:
    return save_text(json.dumps(obj, indent=2) + "\n", path, quiet=quiet, console=console)
