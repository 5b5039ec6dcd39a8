"""Small noise-prediction U-Net with AdaGN conditioning and horizontal wrap padding."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import torch
import torch.nn.functional as F
from torch import nn

from lidardiff.denoiser.bias import bias_channels, make_bias, parse_bias
from lidardiff.errors import ConfigError, ShapeError
from lidardiff.geometry import ProjectionConfig


@dataclass
class DenoiserConfig:
    base_channels: int = 16
    channel_multipliers: tuple[int, ...] = (1, 2, 3)
    blocks_per_resolution: int = 3
    attention_at_lowest: bool = False
    attention_heads: int = 4
    spatial_bias: str = "fourier:4"
    embed_dim: int = 64
    in_channels: int = 2
    out_channels: int = 2

    def __post_init__(self):
        self.channel_multipliers = tuple(int(m) for m in self.channel_multipliers)
        if self.in_channels != 2 or self.out_channels != 2:
            raise ConfigError("the denoiser maps 2-channel range/reflectance images to 2 channels")
        if self.base_channels < 1 or self.blocks_per_resolution < 1 or not self.channel_multipliers:
            raise ConfigError("base_channels, blocks_per_resolution and channel_multipliers must be positive")
        parse_bias(self.spatial_bias)

    @property
    def levels(self) -> int:
        return len(self.channel_multipliers)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["channel_multipliers"] = list(self.channel_multipliers)
        return d


def _groups(channels: int, preferred: int = 8) -> int:
    return math.gcd(channels, preferred)


class WrapConv2d(nn.Conv2d):
    """Conv with circular padding along width and zero padding along height."""

    def __init__(self, in_ch, out_ch, kernel_size=3, stride=1):
        super().__init__(in_ch, out_ch, kernel_size, stride=stride, padding=0)
        self.pad = kernel_size // 2

    def forward(self, x):
        p = self.pad
        if p:
            x = F.pad(x, (p, p, 0, 0), mode="circular")
            x = F.pad(x, (0, 0, p, p))
        return super().forward(x)


class AdaGN(nn.Module):
    def __init__(self, channels: int, embed_dim: int):
        super().__init__()
        self.norm = nn.GroupNorm(_groups(channels), channels, affine=False)
        self.proj = nn.Linear(embed_dim, 2 * channels)

    def forward(self, x, emb):
        scale, shift = self.proj(emb)[:, :, None, None].chunk(2, dim=1)
        return self.norm(x) * (1 + scale) + shift


class ResBlock(nn.Module):
    def __init__(self, in_ch: int, out_ch: int, embed_dim: int):
        super().__init__()
        self.norm1 = AdaGN(in_ch, embed_dim)
        self.conv1 = WrapConv2d(in_ch, out_ch)
        self.norm2 = AdaGN(out_ch, embed_dim)
        self.conv2 = WrapConv2d(out_ch, out_ch)
        self.skip = nn.Conv2d(in_ch, out_ch, 1) if in_ch != out_ch else nn.Identity()

    def forward(self, x, emb):
        h = self.conv1(F.silu(self.norm1(x, emb)))
        h = self.conv2(F.silu(self.norm2(h, emb)))
        return self.skip(x) + h


class SelfAttention(nn.Module):
    def __init__(self, channels: int, heads: int):
        super().__init__()
        self.norm = nn.GroupNorm(_groups(channels), channels)
        self.attn = nn.MultiheadAttention(channels, math.gcd(channels, heads), batch_first=True)

    def forward(self, x):
        b, c, h, w = x.shape
        tokens = self.norm(x).flatten(2).transpose(1, 2)
        out, _ = self.attn(tokens, tokens, tokens, need_weights=False)
        return x + out.transpose(1, 2).reshape(b, c, h, w)


class Downsample(nn.Module):
    def __init__(self, channels: int):
        super().__init__()
        self.conv = WrapConv2d(channels, channels, stride=2)

    def forward(self, x):
        return self.conv(x)


class Upsample(nn.Module):
    def __init__(self, channels: int):
        super().__init__()
        self.conv = WrapConv2d(channels, channels)

    def forward(self, x):
        return self.conv(F.interpolate(x, scale_factor=2, mode="nearest"))


def sinusoidal_embedding(log_snr: torch.Tensor, dim: int) -> torch.Tensor:
    half = dim // 2
    freqs = torch.exp(-math.log(10000.0) * torch.arange(half, dtype=log_snr.dtype, device=log_snr.device) / half)
    args = log_snr[:, None] * freqs[None]
    return torch.cat([args.sin(), args.cos()], dim=1)


class UNet(nn.Module):
    def __init__(self, config: DenoiserConfig, projection: ProjectionConfig):
        super().__init__()
        self.config = config
        self.projection = projection
        self.register_buffer("bias_features",
                             torch.as_tensor(make_bias(config.spatial_bias, projection), dtype=torch.float32))
        emb = config.embed_dim
        self.embed = nn.Sequential(nn.Linear(emb, emb), nn.SiLU(), nn.Linear(emb, emb))

        chans = [config.base_channels * m for m in config.channel_multipliers]
        self.stem = WrapConv2d(config.in_channels + bias_channels(config.spatial_bias), chans[0])

        self.down = nn.ModuleList()
        self.downsample = nn.ModuleList()
        cur = chans[0]
        for i, ch in enumerate(chans):
            blocks = nn.ModuleList()
            for _ in range(config.blocks_per_resolution):
                blocks.append(ResBlock(cur, ch, emb))
                cur = ch
            self.down.append(blocks)
            self.downsample.append(Downsample(ch) if i < len(chans) - 1 else nn.Identity())

        self.mid1 = ResBlock(cur, cur, emb)
        self.mid_attn = SelfAttention(cur, config.attention_heads) if config.attention_at_lowest else None
        self.mid2 = ResBlock(cur, cur, emb)

        self.up = nn.ModuleList()
        self.upsample = nn.ModuleList()
        for i in reversed(range(len(chans))):
            blocks = nn.ModuleList()
            for _ in range(config.blocks_per_resolution):
                blocks.append(ResBlock(cur + chans[i], chans[i], emb))
                cur = chans[i]
            self.up.append(blocks)
            self.upsample.append(Upsample(cur) if i > 0 else nn.Identity())

        self.out_norm = nn.GroupNorm(_groups(cur), cur)
        self.out_conv = WrapConv2d(cur, config.out_channels)
        nn.init.zeros_(self.out_conv.weight)
        nn.init.zeros_(self.out_conv.bias)

    def forward(self, z: torch.Tensor, log_snr, bias: torch.Tensor | None = None) -> torch.Tensor:
        b, _, h, w = z.shape
        factor = 2 ** (self.config.levels - 1)
        if h % factor or w % factor:
            raise ShapeError(f"input {h}x{w} is not divisible by {factor} for {self.config.levels} levels")
        log_snr = torch.as_tensor(log_snr, dtype=z.dtype, device=z.device).reshape(-1).expand(b)
        emb = self.embed(sinusoidal_embedding(log_snr, self.config.embed_dim))

        if bias is None:
            bias = self.bias_features.to(z.dtype)
        if bias.ndim == 3:
            bias = bias.unsqueeze(0).expand(b, -1, -1, -1)
        x = self.stem(torch.cat([z, bias], dim=1))

        skips = []
        for blocks, down in zip(self.down, self.downsample):
            for block in blocks:
                x = block(x, emb)
                skips.append(x)
            x = down(x)
        x = self.mid1(x, emb)
        if self.mid_attn is not None:
            x = self.mid_attn(x)
        x = self.mid2(x, emb)
        for blocks, up in zip(self.up, self.upsample):
            for block in blocks:
                x = block(torch.cat([x, skips.pop()], dim=1), emb)
            x = up(x)
        return self.out_conv(F.silu(self.out_norm(x)))


def unet_predict(model: UNet, z_t: torch.Tensor, log_snr, bias_features: torch.Tensor | None = None) -> torch.Tensor:
    """eps_hat for a single 2 x H x W latent or a batch of them."""
    single = z_t.ndim == 3
    if single:
        z_t = z_t.unsqueeze(0)
        if bias_features is not None and bias_features.ndim == 3:
            bias_features = bias_features.unsqueeze(0)
    out = model(z_t, log_snr, bias_features)
    return out[0] if single else out


def count_parameters(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters())
