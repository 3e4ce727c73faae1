"""Speech-recognition client boundary used for intelligibility scoring.

Recognition itself is out of scope; callers plug in whatever recognizer they
have behind a one-method interface. Three implementations ship: a canned stub
for tests and offline runs, a subprocess adapter, and an HTTP adapter.
"""

from __future__ import annotations

import json
import subprocess
import tempfile
import urllib.error
import urllib.request
from pathlib import Path

from .. import audio
from ..errors import ConfigurationError, TransportError


class AsrClient:
    """Interface: turn a waveform into a transcript string."""

    def transcribe(self, wav: audio.Waveform) -> str:
        raise NotImplementedError


class StubAsrClient(AsrClient):
    """Returns canned transcripts in call order, cycling when exhausted.

    With a single entry it behaves as a constant recognizer. Deterministic,
    no audio inspection.
    """

    def __init__(self, transcripts):
        if isinstance(transcripts, str):
            transcripts = [transcripts]
        self._transcripts = list(transcripts)
        if not self._transcripts:
            raise ConfigurationError("stub recognizer needs at least one transcript")
        self._calls = 0

    def transcribe(self, wav: audio.Waveform) -> str:
        text = self._transcripts[self._calls % len(self._transcripts)]
        self._calls += 1
        return text


class SubprocessAsrClient(AsrClient):
    """Runs a command with the waveform written to a temp WAV as last argument.

    The command must print the transcript to stdout and exit 0. Non-zero exit,
    timeout, or a missing executable raise TransportError.
    """

    def __init__(self, command, timeout: float = 300.0):
        if isinstance(command, str):
            command = [command]
        self.command = list(command)
        self.timeout = timeout

    def transcribe(self, wav: audio.Waveform) -> str:
        with tempfile.TemporaryDirectory(prefix="asr-") as tmp:
            wav_path = Path(tmp) / "utterance.wav"
            audio.write_wav(wav, wav_path)
            try:
                proc = subprocess.run(
                    self.command + [str(wav_path)],
                    capture_output=True,
                    text=True,
                    timeout=self.timeout,
                )
            except FileNotFoundError as exc:
                raise TransportError(f"recognizer command not found: {self.command[0]}") from exc
            except subprocess.TimeoutExpired as exc:
                raise TransportError(f"recognizer timed out after {self.timeout}s") from exc
        if proc.returncode != 0:
            raise TransportError(
                f"recognizer exited {proc.returncode}: {proc.stderr.strip()[:500]}"
            )
        return proc.stdout.strip()


class HttpAsrClient(AsrClient):
    """POSTs WAV bytes to an endpoint returning {"transcript": "..."} JSON."""

    def __init__(self, url: str, timeout: float = 300.0):
        self.url = url
        self.timeout = timeout

    def transcribe(self, wav: audio.Waveform) -> str:
        with tempfile.TemporaryDirectory(prefix="asr-") as tmp:
            wav_path = Path(tmp) / "utterance.wav"
            audio.write_wav(wav, wav_path)
            payload = wav_path.read_bytes()
        req = urllib.request.Request(
            self.url, data=payload, headers={"Content-Type": "audio/wav"}, method="POST"
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                body = resp.read()
        except urllib.error.URLError as exc:
            raise TransportError(f"recognizer endpoint unreachable: {exc}") from exc
        try:
            doc = json.loads(body)
            return str(doc["transcript"])
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise TransportError(f"recognizer returned malformed response: {body[:200]!r}") from exc


def transcribe(wav: audio.Waveform, client: AsrClient, utterance_id: str | None = None) -> str:
    """Run the client on one waveform; failures carry the utterance id."""
    try:
        return client.transcribe(wav)
    except TransportError as exc:
        if utterance_id is None:
            raise
        raise TransportError(f"{utterance_id}: {exc}") from exc


def make_asr_client(kind: str, **kwargs) -> AsrClient:
    """Factory keyed by config string: stub | subprocess | http."""
    if kind == "stub":
        return StubAsrClient(kwargs.get("transcripts", [""]))
    if kind == "subprocess":
        return SubprocessAsrClient(kwargs["command"], timeout=kwargs.get("timeout", 300.0))
    if kind == "http":
        return HttpAsrClient(kwargs["url"], timeout=kwargs.get("timeout", 300.0))
    raise ConfigurationError(f"unknown recognizer kind {kind!r}")
