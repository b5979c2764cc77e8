"""Project list ingestion, identity normalization, dedup, checkout and batching."""

from __future__ import annotations

import json
import logging
import os
import posixpath
import re
import shutil
import subprocess
import tempfile
import urllib.error
import urllib.request
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Iterable, Protocol, Sequence
from urllib.parse import urlsplit

log = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class Remote:
    url: str
    host: str
    owner: str
    name: str


@dataclass(frozen=True, slots=True)
class Local:
    path: Path


Origin = Remote | Local

_ID_UNSAFE = re.compile(r"[^a-z0-9_.-]")


def project_id_for(key: str) -> str:
    return _ID_UNSAFE.sub("_", key.replace("/", "__"))


@dataclass(frozen=True, slots=True)
class ProjectRef:
    raw: str
    canonical_key: str
    origin: Origin
    project_id: str = ""

    def __post_init__(self):
        if not self.project_id:
            object.__setattr__(self, "project_id", project_id_for(self.canonical_key))

    def with_key(self, key: str) -> ProjectRef:
        return replace(self, canonical_key=key, project_id=project_id_for(key))


@dataclass(frozen=True, slots=True)
class Batch:
    index: int
    projects: tuple[ProjectRef, ...]


class MalformedEntry(ValueError):
    pass


_SCP_LIKE = re.compile(r"^[\w.-]+@([\w.-]+):(.+)$")     # git@github.com:owner/repo.git
_BARE_HOST = re.compile(r"^([\w-]+(\.[\w-]+)+)/(.+)$")   # github.com/owner/repo


def _strip_repo_suffixes(path: str) -> str:
    path = path.strip("/")
    while True:
        before = path
        if path.lower().endswith(".git"):
            path = path[:-4]
        path = path.rstrip("/")
        if path == before:
            return path


def _remote(raw: str, host: str, path: str) -> ProjectRef:
    host = host.lower()
    if host.startswith("www."):
        host = host[4:]
    parts = [p for p in _strip_repo_suffixes(path).split("/") if p]
    if len(parts) < 2 or not host:
        raise MalformedEntry(f"not a host/owner/name repository reference: {raw!r}")
    owner, name = parts[0], _strip_repo_suffixes(parts[1])
    key = f"{host}/{owner}/{name}".lower()
    return ProjectRef(raw, key, Remote(f"https://{host}/{owner}/{name}", host, owner, name))


def _local(raw: str, path: str, base: Path | None) -> ProjectRef:
    p = Path(os.path.expanduser(path))
    if not p.is_absolute() and base is not None:
        p = base / p
    shown = posixpath.normpath(path.replace("\\", "/")).lstrip("/")
    key = "local/" + shown.lower().rstrip("/")
    return ProjectRef(raw, key, Local(p.resolve()))


def parse_entry(line: str, base: Path | None = None) -> ProjectRef:
    """One project-list entry: a repository URL or a local directory."""
    raw = line.strip()
    if not raw:
        raise MalformedEntry("empty entry")
    if raw.startswith("file://"):
        return _local(raw, urlsplit(raw).path, base)
    if raw.startswith(("/", ".", "~")):
        return _local(raw, raw, base)
    if "://" in raw:
        u = urlsplit(raw)
        if u.scheme not in ("http", "https", "ssh", "git"):
            raise MalformedEntry(f"unsupported scheme {u.scheme!r}: {raw!r}")
        return _remote(raw, u.hostname or "", u.path)
    m = _SCP_LIKE.match(raw)
    if m:
        return _remote(raw, m.group(1), m.group(2))
    m = _BARE_HOST.match(raw)
    if m:
        return _remote(raw, m.group(1), m.group(3))
    raise MalformedEntry(f"unrecognized project entry: {raw!r}")


def load_project_list(path: str | os.PathLike, diagnostics: list[str] | None = None) -> list[ProjectRef]:
    """Read one entry per line; ``#`` comments and blank lines are skipped.

    Relative local paths are resolved against the list file's directory.
    Raises FileNotFoundError if the list is missing.
    """
    path = Path(path)
    refs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            try:
                refs.append(parse_entry(s, path.parent))
            except MalformedEntry as e:
                msg = f"{path}:{lineno}: {e}"
                log.warning("%s", msg)
                if diagnostics is not None:
                    diagnostics.append(msg)
    return refs


def load_corpus_dir(root: str | os.PathLike) -> list[ProjectRef]:
    """Every immediate subdirectory of ``root`` is a local project, in name order."""
    root = Path(root)
    return [ProjectRef(d.name, "local/" + d.name.lower(), Local(d.resolve()))
            for d in sorted(root.iterdir(), key=lambda d: d.name)
            if d.is_dir() and not d.name.startswith(".")]


def load_input(path: str | os.PathLike, diagnostics: list[str] | None = None) -> list[ProjectRef]:
    return load_corpus_dir(path) if Path(path).is_dir() else load_project_list(path, diagnostics)


class LookupFailed(Exception):
    pass


class RepoLookup(Protocol):
    def canonical(self, host: str, owner: str, name: str) -> tuple[str, str]:
        """Current (owner, name) for a repository; raises LookupFailed."""
        ...


class GitHubLookup:
    """Resolves renamed/moved repositories through the GitHub REST API."""

    def __init__(self, timeout: float = 10.0, token: str | None = None,
                 api: str = "https://api.github.com"):
        self.timeout = timeout
        self.token = token if token is not None else os.environ.get("GITHUB_TOKEN")
        self.api = api.rstrip("/")

    def canonical(self, host: str, owner: str, name: str) -> tuple[str, str]:
        if host != "github.com":
            raise LookupFailed(f"no lookup service for host {host}")
        req = urllib.request.Request(f"{self.api}/repos/{owner}/{name}",
                                     headers={"Accept": "application/vnd.github+json"})
        if self.token:
            req.add_header("Authorization", f"Bearer {self.token}")
        try:
            # urllib follows the 301 GitHub sends for moved repositories
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                full_name = json.load(resp)["full_name"]
        except (urllib.error.URLError, OSError, ValueError, KeyError) as e:
            raise LookupFailed(f"lookup of {owner}/{name} failed: {e}") from e
        new_owner, _, new_name = full_name.partition("/")
        return new_owner, new_name


class MappingLookup:
    """Lookup backed by a fixed redirect map ``"owner/name" -> "owner/name"``."""

    def __init__(self, redirects: dict[str, str], unavailable: Iterable[str] = ()):
        self.redirects = {k.lower(): v for k, v in redirects.items()}
        self.unavailable = {u.lower() for u in unavailable}

    def canonical(self, host: str, owner: str, name: str) -> tuple[str, str]:
        key = f"{owner}/{name}".lower()
        if key in self.unavailable:
            raise LookupFailed(f"{key}: service unavailable")
        owner2, _, name2 = self.redirects.get(key, key).partition("/")
        return owner2, name2


def dedup(refs: Sequence[ProjectRef], online: bool = False, client: RepoLookup | None = None,
          diagnostics: list[str] | None = None) -> list[ProjectRef]:
    """Keep the first ref per canonical key, in input order.

    With ``online`` the key is first replaced by the lookup service's
    answer, so moved repositories collapse. A failed lookup keeps the
    offline key; the project is never dropped.
    """
    if online and client is None:
        client = GitHubLookup()
    seen: set[str] = set()
    out = []
    for ref in refs:
        if online and isinstance(ref.origin, Remote):
            o = ref.origin
            try:
                owner, name = client.canonical(o.host, o.owner, o.name)
                ref = ref.with_key(f"{o.host}/{owner}/{name}".lower())
            except LookupFailed as e:
                msg = f"{ref.raw}: {e}; keeping offline key"
                log.warning("%s", msg)
                if diagnostics is not None:
                    diagnostics.append(msg)
        if ref.canonical_key not in seen:
            seen.add(ref.canonical_key)
            out.append(ref)
    return out


class MaterializeError(Exception):
    pass


CloneFn = Callable[[str, Path], None]


def git_clone(url: str, dest: Path) -> None:
    """Shallow clone of the latest revision."""
    cmd = ["git", "clone", "--depth", "1", "--quiet", url, str(dest)]
    env = dict(os.environ, GIT_TERMINAL_PROMPT="0")
    proc = subprocess.run(cmd, capture_output=True, text=True, env=env)
    if proc.returncode != 0:
        raise MaterializeError(f"git clone {url} failed: {proc.stderr.strip()}")


def materialize(ref: ProjectRef, workdir: str | os.PathLike, clone: CloneFn = git_clone) -> Path:
    """Local root of a project, cloning remotes into ``workdir/<project_id>``.

    An existing checkout is reused as-is. Clones land in a scratch
    directory first so an interrupted clone never looks complete.
    """
    if isinstance(ref.origin, Local):
        if not ref.origin.path.is_dir():
            raise MaterializeError(f"local project {ref.origin.path} is not a directory")
        return ref.origin.path
    workdir = Path(workdir)
    dest = workdir / ref.project_id
    if dest.is_dir():
        return dest
    workdir.mkdir(parents=True, exist_ok=True)
    scratch = Path(tempfile.mkdtemp(prefix=f".{ref.project_id}-", dir=workdir))
    try:
        target = scratch / "checkout"
        try:
            clone(ref.origin.url, target)
        except MaterializeError:
            raise
        except Exception as e:
            raise MaterializeError(f"cloning {ref.origin.url} failed: {e}") from e
        if not target.is_dir():
            raise MaterializeError(f"cloning {ref.origin.url} produced no checkout")
        target.rename(dest)
    finally:
        shutil.rmtree(scratch, ignore_errors=True)
    return dest


def make_batches(refs: Sequence[ProjectRef], batch_size: int) -> list[Batch]:
    if batch_size < 1:
        raise ValueError(f"batch size must be positive, got {batch_size}")
    return [Batch(k, tuple(refs[i:i + batch_size]))
            for k, i in enumerate(range(0, len(refs), batch_size))]
