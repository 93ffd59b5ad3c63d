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
#include "surfshape/shape.hpp"

namespace surfshape {

Shape unvec(const Eigen::Ref<const Eigen::VectorXd>& v)
{
    const Eigen::Index j = v.size() / 3;
    Shape x(j, 3);
    Eigen::Map<Eigen::VectorXd>(x.data(), x.size()) = v.head(3 * j);
    return x;
}

Eigen::VectorXd slot_weights(const Eigen::VectorXd& vertex_weights)
{
    const Eigen::Index j = vertex_weights.size();
    Eigen::VectorXd w(3 * j);
    w << vertex_weights, vertex_weights, vertex_weights;
    return w;
}

double a_inner(const Eigen::Ref<const Eigen::VectorXd>& u, const Eigen::Ref<const Eigen::VectorXd>& v,
               const Eigen::VectorXd& vertex_weights)
{
    const Eigen::Index j = vertex_weights.size();
    double sum = 0.0;
    for (int d = 0; d < 3; ++d)
        sum += (u.segment(d * j, j).cwiseProduct(v.segment(d * j, j))).dot(vertex_weights);
    return sum;
}

double a_norm(const Eigen::Ref<const Eigen::VectorXd>& u, const Eigen::VectorXd& vertex_weights)
{
    return std::sqrt(a_inner(u, u, vertex_weights));
}

Eigen::RowVector3d weighted_centroid(const Shape& x, const Eigen::VectorXd& vertex_weights)
{
    return (vertex_weights.transpose() * x) / vertex_weights.sum();
}

} // namespace surfshape
