from gda_hin.alignment.autoencoder import (
    TypeAutoencoder,
    TypeDiscriminator,
    domain_adversarial_bce,
    nda_loss,
    nda_total,
    recon_loss_shared,
)
from gda_hin.alignment.grl import grl_apply, grl_backward

__all__ = [
    "TypeAutoencoder",
    "TypeDiscriminator",
    "domain_adversarial_bce",
    "grl_apply",
    "grl_backward",
    "nda_loss",
    "nda_total",
    "recon_loss_shared",
]
