#pragma once

#include "asx/asymptotics.hpp"
#include "asx/error.hpp"
#include "asx/oracle.hpp"
#include "asx/quadrature.hpp"
#include "asx/spectral.hpp"
#include "asx/spectrum.hpp"
#include "asx/study.hpp"
