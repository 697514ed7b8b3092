"""Static literature reference table.

These rows are reported values copied from their sources, never recomputed
here; they exist so emitted reports can place new runs next to published
numbers.
"""

LITERATURE_RESULTS = [
    {
        "method": "Amiri et al. 2020 (FT encoder U-Net)",
        "dice": 95.1,
        "pa": None,
        "miou": None,
        "trainable_params": None,
        "source": "Amiri et al., 2020",
        "kind": "literature",
    },
    {
        "method": "Alzubaidi et al. 2022 (ensemble of 8 CNNs)",
        "dice": None,
        "pa": None,
        "miou": 98.53,
        "trainable_params": 28_120_000,
        "source": "Alzubaidi et al., 2022",
        "kind": "literature",
    },
    {
        "method": "MobileNetV2 U-Net, decoder unfrozen (reported)",
        "dice": 96.28,
        "pa": 97.77,
        "miou": 92.87,
        "trainable_params": 4_400_000,
        "source": "this work, reported HC18 run",
        "kind": "reported",
    },
]
