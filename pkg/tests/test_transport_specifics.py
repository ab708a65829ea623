"""Per-scheme transport behavior that the shared contract cannot cover."""

import asyncio
import json
import struct

import pytest

from roomkit.transport import (
    AddressInUse,
    EndpointAddress,
    MemNamespace,
    UnsupportedScheme,
    connect,
    listen,
    simulate_fault,
)
from roomkit.wire import MAX_PAYLOAD, Frame, OversizeFrame

from conftest import run


def test_address_parse_print_roundtrip():
    for text in ["tcp://192.168.1.5:4700", "mem://roomA", "ws://0.0.0.0:4701"]:
        assert str(EndpointAddress.parse(text)) == text
    with pytest.raises(ValueError):
        EndpointAddress.parse("not-an-address")


def test_unsupported_scheme():
    with pytest.raises(UnsupportedScheme):
        run(listen("xyz://a"))
    with pytest.raises(UnsupportedScheme):
        run(connect("xyz://a"))


def test_mem_name_uniqueness_per_namespace():
    async def body():
        ns = MemNamespace()
        await listen("mem://t1", namespace=ns)
        with pytest.raises(AddressInUse):
            await listen("mem://t1", namespace=ns)
        # A different namespace is a different world.
        other = MemNamespace()
        await listen("mem://t1", namespace=other)

    run(body())


@pytest.mark.parametrize("scheme", ["tcp", "ws"])
def test_ephemeral_port_reported(scheme):
    async def body():
        listener = await listen(f"{scheme}://127.0.0.1:0")
        _, port = listener.address.host_port()
        assert port != 0
        await listener.close()

    run(body())


def test_tcp_connect_refused_on_unbound_port():
    async def body():
        from roomkit.transport import ConnectionRefused

        with pytest.raises(ConnectionRefused):
            await connect("tcp://127.0.0.1:1", timeout=2.0)

    run(body())


def test_mem_fault_injection_drops_in_flight():
    async def body():
        ns = MemNamespace()
        listener = await listen("mem://f1", namespace=ns)
        client = await connect("mem://f1", namespace=ns)
        server = await listener.accept()
        await client.send(Frame(b'{"x":1}'))
        simulate_fault(client)
        # Both ends observe Closed; the queued frame was dropped.
        assert await server.recv() is None
        assert await client.recv() is None
        from roomkit.transport import ChannelClosed

        with pytest.raises(ChannelClosed):
            await client.send(Frame(b"{}"))
        await listener.close()

    run(body())


def test_fault_injection_rejected_on_other_schemes():
    async def body():
        listener = await listen("tcp://127.0.0.1:0")
        client = await connect(listener.address)
        from roomkit.transport import TransportError

        with pytest.raises(TransportError):
            simulate_fault(client)
        await client.close()
        await listener.close()

    run(body())


def test_tcp_recv_rejects_hostile_declared_length():
    async def body():
        listener = await listen("tcp://127.0.0.1:0")
        host, port = listener.address.host_port()
        reader, writer = await asyncio.open_connection(host, port)
        server = await listener.accept()
        writer.write(struct.pack(">I", MAX_PAYLOAD + 1) + b"x" * 64)
        await writer.drain()
        with pytest.raises(OversizeFrame):
            await server.recv()
        writer.close()
        await listener.close()

    run(body())


def test_ws_recv_rejects_hostile_oversize_message():
    async def body():
        from websockets.asyncio.client import connect as ws_connect

        listener = await listen("ws://127.0.0.1:0")
        host, port = listener.address.host_port()
        proto = await ws_connect(
            f"ws://{host}:{port}", subprotocols=["roomkit.v1"], max_size=None
        )
        server = await listener.accept()
        big = json.dumps({"blob": "x" * (MAX_PAYLOAD + 10)})
        await proto.send(big)
        with pytest.raises(OversizeFrame):
            await server.recv()
        await proto.close()
        await listener.close()

    run(body())


def test_ws_subprotocol_negotiated():
    async def body():
        listener = await listen("ws://127.0.0.1:0")
        client = await connect(listener.address)
        assert client._proto.subprotocol == "roomkit.v1"
        await client.close()
        await listener.close()

    run(body())


def test_ws_message_is_bare_json_no_length_prefix():
    # A raw ws client (no roomkit framing) must see exactly the JSON text.
    async def body():
        from websockets.asyncio.client import connect as ws_connect

        listener = await listen("ws://127.0.0.1:0")
        host, port = listener.address.host_port()
        proto = await ws_connect(f"ws://{host}:{port}", subprotocols=["roomkit.v1"])
        server = await listener.accept()
        payload = b'{"v":1,"type":"leave"}'
        await server.send(Frame(payload))
        message = await proto.recv()
        assert message == payload.decode()
        await proto.close()
        await listener.close()

    run(body())
