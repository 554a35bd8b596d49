import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from models.measure import CovarianceMatrix, LatticeMeasure


class TiltSolution(BaseModel):
    """Solution t of D log Z(t) = xi together with the tilted measure G_t and I(xi)"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    xi: np.ndarray
    t: np.ndarray
    log_z: float
    rate: float = Field(..., ge=0.0)
    tilted: LatticeMeasure
    tilted_cov: CovarianceMatrix
    iterations: int
    residual: float
