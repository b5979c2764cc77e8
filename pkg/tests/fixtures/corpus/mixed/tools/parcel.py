"""Parcel utilities."""

import dataclasses
import json


@dataclasses.dataclass
class Parcel:
    key: str
    value: int = 0

    def bump(self, by=1):
        if by < 0:
            raise ValueError("negative bump")
        self.value += by
        return self.value


def load(path):
    with open(path) as fh:
        raw = json.load(fh)
    out = []
    for entry in raw:
        out.append(Parcel(entry["key"], entry.get("value", 0)))
    return out


def drain(items, limit=7):
    """while True loops in docs are not code."""
    taken = 0
    while items and taken < limit:
        items.pop()
        taken += 1
    return taken


async def poll(client):
    async for event in client.events():
        if event.kind == "stop":
            break
        yield event
