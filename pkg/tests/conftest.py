import asyncio
import itertools

import pytest

from roomkit.transport import EndpointAddress, MemNamespace, connect, listen

_counter = itertools.count()


def run(coro, timeout=30.0):
    """Drive a coroutine to completion on a fresh event loop."""

    async def bounded():
        return await asyncio.wait_for(coro, timeout)

    return asyncio.run(bounded())


class TransportHarness:
    """Scheme-agnostic listen/connect for the shared contract suite."""

    def __init__(self, scheme: str):
        self.scheme = scheme
        self.namespace = MemNamespace()

    def fresh_address(self) -> EndpointAddress:
        if self.scheme == "mem":
            return EndpointAddress("mem", f"t{next(_counter)}")
        return EndpointAddress(self.scheme, "127.0.0.1:0")

    async def listen(self, addr=None):
        return await listen(addr or self.fresh_address(), namespace=self.namespace)

    async def connect(self, addr, timeout=5.0):
        return await connect(addr, timeout=timeout, namespace=self.namespace)

    async def open_pair(self):
        listener = await self.listen()
        client = await self.connect(listener.address)
        server = await listener.accept()
        return listener, client, server


@pytest.fixture(params=["mem", "tcp", "ws"])
def transport(request) -> TransportHarness:
    return TransportHarness(request.param)
