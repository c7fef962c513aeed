"""Brain/coprocessor link: packet codec, endpoints, and transports."""

from ringbot.link.endpoints import (
    BrainEndpoint,
    EndpointState,
    Inbound,
    JetsonEndpoint,
    Mode,
    accept_inbound,
    brain_endpoint_step,
    jetson_endpoint_step,
)
from ringbot.link.packets import (
    BrainPacket,
    JetsonPacket,
    decode_brain,
    decode_jetson,
    encode_brain,
    encode_jetson,
)
from ringbot.link.transports import (
    FaultyTransport,
    FileTransport,
    MemoryTransport,
    StreamTransport,
    file_pair,
    memory_pair,
    pipe_pair,
)

__all__ = [
    "BrainEndpoint", "EndpointState", "Inbound", "JetsonEndpoint", "Mode",
    "accept_inbound", "brain_endpoint_step", "jetson_endpoint_step",
    "BrainPacket", "JetsonPacket", "decode_brain", "decode_jetson",
    "encode_brain", "encode_jetson",
    "FaultyTransport", "FileTransport", "MemoryTransport", "StreamTransport",
    "file_pair", "memory_pair", "pipe_pair",
]
