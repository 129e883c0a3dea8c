/* Copyright 2026 The WeakCube Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Umbrella header.

#pragma once

#include "weakcube/cube_fit.hpp"
#include "weakcube/error.hpp"
#include "weakcube/eval3d.hpp"
#include "weakcube/geometry.hpp"
#include "weakcube/image_io.hpp"
#include "weakcube/objective.hpp"
#include "weakcube/pipeline.hpp"
#include "weakcube/pseudo_gt.hpp"
#include "weakcube/scene_synth.hpp"
#include "weakcube/weak_losses.hpp"
