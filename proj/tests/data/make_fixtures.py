#!/usr/bin/env python3
"""Writes the WAV fixtures used by the unit tests."""
import struct
import wave

import numpy as np

RATE = 44100


def write_pcm16(path, samples, channels=1):
    with wave.open(path, "wb") as w:
        w.setnchannels(channels)
        w.setsampwidth(2)
        w.setframerate(RATE)
        w.writeframes(samples.astype("<i2").tobytes())


def write_float32(path, samples):
    data = samples.astype("<f4").tobytes()
    fmt = struct.pack("<HHIIHH", 3, 1, RATE, RATE * 4, 4, 32)
    body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt + b"data" + struct.pack("<I", len(data)) + data
    with open(path, "wb") as f:
        f.write(b"RIFF" + struct.pack("<I", len(body)) + body)


n = np.arange(RATE)
sine = np.round(32767 * np.sin(2 * np.pi * 440 * n / RATE))
write_pcm16("sine440_pcm16.wav", sine)
np.savetxt("sine440_pcm16.txt", sine.astype(int), fmt="%d")

left = np.round(16000 * np.sin(2 * np.pi * 220 * n / RATE))
right = np.zeros_like(left)
write_pcm16("stereo_left220_pcm16.wav", np.stack([left, right], axis=1).reshape(-1), channels=2)

write_float32("ramp_float32.wav", np.linspace(-0.5, 0.5, 1000))
write_pcm16("silence_pcm16.wav", np.zeros(RATE))
