/*
 * surfshape - functional shape analysis for corresponded triangulated surfaces.
 *
 * Copyright 2026 The surfshape Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <Eigen/Core>

namespace surfshape {

/// J×3 configuration, one row per vertex. Column-major storage means the
/// raw buffer is already vec(X): x-coordinates first, then y, then z.
using Shape = Eigen::Matrix<double, Eigen::Dynamic, 3>;

/// vec(X): entries [0,J) hold x, [J,2J) hold y, [2J,3J) hold z.
inline Eigen::VectorXd vec(const Shape& x)
{
    return Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
}

/// Exact inverse of vec() for a vector of length 3J.
Shape unvec(const Eigen::Ref<const Eigen::VectorXd>& v);

/// Per-vertex weights repeated over the three coordinate slots (length 3J).
Eigen::VectorXd slot_weights(const Eigen::VectorXd& vertex_weights);

/// Area-weighted inner product Σ_j a_j (u_j · v_j) on vec-stacked fields.
double a_inner(const Eigen::Ref<const Eigen::VectorXd>& u,
               const Eigen::Ref<const Eigen::VectorXd>& v,
               const Eigen::VectorXd& vertex_weights);

double a_norm(const Eigen::Ref<const Eigen::VectorXd>& u, const Eigen::VectorXd& vertex_weights);

/// Weighted centroid Σ a_j x_j / Σ a_j as a row vector.
Eigen::RowVector3d weighted_centroid(const Shape& x, const Eigen::VectorXd& vertex_weights);

} // namespace surfshape
